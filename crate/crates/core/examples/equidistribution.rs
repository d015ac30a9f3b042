//! Weyl sums and discrepancy of (n_k x) for x drawn from a measure, and the double-sum series.

use hyperbound::measures::{AmplitudeRule, RieszSpec, SpectralMeasure};
use hyperbound::ud::{del_series, sample, ud_experiment, SequenceSpec, UdConfig};

fn main() -> hyperbound::Result<()> {
    let riesz = SpectralMeasure::riesz(RieszSpec::geometric(4, 4, AmplitudeRule::InvLog))?;
    let nat = SequenceSpec::Arith { a: 0, b: 1 };
    println!("first Riesz samples: {:?}", sample(&riesz, 5, 1)?);

    let cfg = UdConfig {
        n: 20_000,
        ..UdConfig::default()
    };
    for (name, nu) in [("riesz", &riesz), ("dirac(0)", &SpectralMeasure::dirac(0.0))] {
        let r = ud_experiment(nu, &nat, &cfg)?;
        println!(
            "{name:<9} {} / {} pass; |S_N| median {:.2e}, discrepancy median {:.2e}",
            r.passing, cfg.samples, r.weyl.q50, r.discrepancy.q50
        );
    }

    let gaps = SequenceSpec::BoundedGap { d: 3, seed: 2, start: 1 };
    for (name, nu, seq) in [
        ("lebesgue, n_k = k", SpectralMeasure::lebesgue(), &nat),
        ("dirac(0), n_k = k", SpectralMeasure::dirac(0.0), &nat),
        ("riesz, bounded gaps", riesz.clone(), &gaps),
    ] {
        let r = del_series(&nu, seq, 1, 10_000)?;
        println!("{name:<20} {:?}, partial sum {:.6}", r.series.verdict, r.series.total());
    }
    Ok(())
}
