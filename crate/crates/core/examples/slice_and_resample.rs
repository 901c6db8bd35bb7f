//! Cut a long signal into daily curves and resample them to a dyadic grid.

use wavecluster::data::{slice_series, SampledSignal};

fn main() -> Result<(), wavecluster::Error> {
    // ten "days" of 48 half-hourly samples plus a partial day
    let values: Vec<f64> = (0..500)
        .map(|t| {
            let day = (t as f64 / 48.0) * std::f64::consts::TAU;
            10.0 + 3.0 * day.sin() + 0.5 * (3.0 * day).cos()
        })
        .collect();
    let signal = SampledSignal::new(values, 0.5)?;
    let sliced = slice_series(&signal, 48)?;
    println!(
        "{} curves of {} samples, {} samples left over",
        sliced.dataset.n_curves(),
        sliced.dataset.curve_len(),
        sliced.remainder
    );

    let dyadic = sliced.dataset.resample_dyadic(6)?;
    println!("resampled to {} points per curve", dyadic.curve_len());
    let c = dyadic.curve(0);
    println!(
        "first curve starts {:.3} {:.3} {:.3} and ends {:.3}",
        c[0],
        c[1],
        c[2],
        c[c.len() - 1]
    );
    Ok(())
}
