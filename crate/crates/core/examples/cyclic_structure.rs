//! Period, cyclic classes, limits of P^(nd + j) and the peripheral spectrum of a random chain.

use hyperbound::finite::{
    convergence_rate, graph_period, limit_residuals, period_and_classes, random_block_cyclic, unimodular_eigencheck,
    BlockCyclicOptions,
};

fn main() -> hyperbound::Result<()> {
    let op = random_block_cyclic(
        BlockCyclicOptions {
            d: 3,
            class_size: 4,
            uneven_mass: true,
        },
        42,
    )?;
    let dec = period_and_classes(&op)?;
    println!("period {} (trace oracle {}), classes {:?}", dec.period, graph_period(&op), dec.classes);
    println!("class masses {:?}", dec.class_masses);

    let rate = convergence_rate(&op, &dec, 25)?;
    println!(
        "||P^(nd) - E_d||_2 ~ {:.3} * {:.4}^n   (class-mean-zero ||P^d|| = {:.4})",
        rate.fit_l2.c, rate.fit_l2.rho, rate.rho_gap
    );

    let f: Vec<f64> = (0..op.n()).map(|i| (i as f64).sin()).collect();
    for n in [1, 5, 10, 20] {
        let r = limit_residuals(&op, &dec, &f, n, 1)?;
        println!("n = {n:>2}: residual L1 {:.2e}  L2 {:.2e}  dual L2 {:.2e}", r.l1, r.l2, r.dual_l2);
    }

    let eig = unimodular_eigencheck(&op, &dec)?;
    for r in &eig.roots {
        println!("root {}: ({:+.4}, {:+.4}) residual {:.1e}", r.k, r.re, r.im, r.residual);
    }
    println!("peripheral spectrum {:?}, passed {}", eig.peripheral, eig.passed);
    Ok(())
}
