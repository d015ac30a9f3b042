//! Run the hyperboundedness classifier over a handful of measures.

use hyperbound::criteria::{classify, ht_series, hr_series};
use hyperbound::measures::{AmplitudeRule, ConvexSeq, RieszSpec, SpectralMeasure};

fn main() -> hyperbound::Result<()> {
    let measures = vec![
        ("lebesgue", SpectralMeasure::lebesgue()),
        ("dirac(0.3)", SpectralMeasure::dirac(0.3)),
        ("cantor", SpectralMeasure::cantor()),
        ("riesz 4^k, 1/ln(k+2)", SpectralMeasure::riesz(RieszSpec::geometric(4, 4, AmplitudeRule::InvLog))?),
        ("convex 1/ln(n+2)", SpectralMeasure::convex_ac(ConvexSeq::inv_log())?),
        ("convex (1+n)^-1/2", SpectralMeasure::convex_ac(ConvexSeq::power(0.5))?),
    ];
    for (name, nu) in &measures {
        let c = classify(nu)?;
        println!("{name:<22} {:?}", c.overall);
    }

    // The two series behind the convex 1/log case.
    let nu = &measures[4].1;
    let ht = ht_series(nu, 100_000)?;
    println!("\nht: {:?}, partial sum {:.4}, tail {:?}", ht.verdict, ht.total(), ht.tail_estimate);
    for p in [1.2, 1.5, 1.9] {
        let hr = hr_series(nu, p, 0.1, 100_000)?;
        println!("hr p = {p}: {:?}", hr.verdict);
    }
    Ok(())
}
