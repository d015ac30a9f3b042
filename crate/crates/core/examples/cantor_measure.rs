//! Self-similarity and Wiener average of the Cantor measure.

use hyperbound::criteria::wiener_average;
use hyperbound::measures::{cantor_factors, SpectralMeasure};

fn main() -> hyperbound::Result<()> {
    let nu = SpectralMeasure::cantor();
    for n in [1, 3, 9, 27, 2, 6, 5] {
        let z = nu.coefficient(n)?;
        println!("nu({n:>2}) = {:+.6} {:+.6}i   |nu| = {:.6}", z.re, z.im, z.norm());
    }

    let (factors, tail) = cantor_factors(1);
    println!("|nu(1)| from {} factors, tail bound {tail:.1e}", factors.len());

    for n in [100, 1_000, 10_000, 100_000] {
        println!("Wiener average N = {n:>6}: {:.3e}", wiener_average(&nu, n)?);
    }
    Ok(())
}
