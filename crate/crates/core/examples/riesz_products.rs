//! Coefficients of a lacunary Riesz product and the singularity of its convolution powers.

use hyperbound::criteria::power_singularity_check;
use hyperbound::measures::{riesz_decompose, AmplitudeRule, RieszSpec, SpectralMeasure};

fn main() -> hyperbound::Result<()> {
    // n_k = 4^k, a_k = 1 / ln(k + 2)
    let spec = RieszSpec::geometric(4, 4, AmplitudeRule::InvLog);
    let nu = SpectralMeasure::riesz(spec.clone())?;

    for m in [0, 4, 5, 12, 20, 60, 84, 1364] {
        let signs = riesz_decompose(&spec, m)?;
        println!("nu({m:>4}) = {:.6}  signs {:?}", nu.coefficient(m)?.re, signs);
    }

    let sup = (1..=20_000).map(|m| nu.coefficient(m).map(|z| z.norm())).collect::<Result<Vec<_>, _>>()?;
    println!("max |nu(m)| over 0 < m <= 20000: {:.6}", sup.iter().cloned().fold(0.0, f64::max));

    for k in [1, 3, 10] {
        let v = power_singularity_check(&spec, k, 1_000_000)?;
        println!("sum a_j^{}: {:?} ({})", 2 * k, v.verdict, v.note);
    }
    Ok(())
}
