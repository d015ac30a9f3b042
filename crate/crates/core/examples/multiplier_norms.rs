//! Convolution operators on the circle: norm lower bounds, kernel norms, uniform ergodicity.

use hyperbound::circle::{dirichlet_norm, multiplier_norm_lower_bound, uniform_ergodicity_check};
use hyperbound::measures::{ConvexSeq, SpectralMeasure};

fn main() -> hyperbound::Result<()> {
    for n in [8, 64, 512] {
        println!("||D_{n}||_1.5 = {:.4}   ||D_{n}||_2 = {:.4}", dirichlet_norm(n, 1.5)?, dirichlet_norm(n, 2.0)?);
    }

    let measures = [
        ("lebesgue", SpectralMeasure::lebesgue()),
        ("dirac(0.3)", SpectralMeasure::dirac(0.3)),
        ("cantor", SpectralMeasure::cantor()),
        ("convex (1+n)^-1/2", SpectralMeasure::convex_ac(ConvexSeq::power(0.5))?),
    ];
    for (name, nu) in &measures {
        let lb = multiplier_norm_lower_bound(nu, 1.2, 2.0, 256)?;
        let ue = uniform_ergodicity_check(nu, 5000)?;
        println!(
            "{name:<18} ||P||_(1.2->2) >= {:.4} via {:?};  margin {:.4} at n = {}",
            lb.ratio, lb.witness, ue.margin, ue.argmin
        );
    }
    Ok(())
}
