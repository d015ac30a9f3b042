//! Exact and optimised L^p -> L^q norms of finite operators and the aperiodicity certificate.

use hyperbound::finite::{aperiodicity_certificate, example2, lazy_swap, opnorm, threshold_l3, threshold_l4};

fn main() -> hyperbound::Result<()> {
    let e2 = example2(8)?;
    for (p, q) in [(2.0, 2.0), (2.0, 3.0), (2.0, 4.0), (2.0, f64::INFINITY), (1.5, 3.0)] {
        let est = opnorm(&e2, p, q, false)?;
        println!("example2  {p} -> {q}: {:.10}  [{}]", est.value, est.method);
    }
    println!("thresholds: 2^(1/4) = {:.10}, 2^(1/6) = {:.10}", threshold_l4(), threshold_l3());

    for (name, op) in [("example2", e2), ("3/4 E + 1/4 swap", lazy_swap(0.25)?)] {
        let c = aperiodicity_certificate(&op)?;
        println!(
            "{name:<17} period {}  L2->L4 {:.6} fires {}  L2->L3 {:.6} fires {}",
            c.period, c.l2_l4.norm.value, c.l2_l4.fires, c.l2_l3.norm.value, c.l2_l3.fires
        );
    }
    Ok(())
}
