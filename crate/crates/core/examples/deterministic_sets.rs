//! Deterministic sets by subset search, compared with the cyclic-class algebra.

use hyperbound::finite::{cycle, deterministic_sets, example2, random_block_cyclic, BlockCyclicOptions};

fn show(name: &str, op: &hyperbound::finite::FiniteOperator) -> hyperbound::Result<()> {
    let r = deterministic_sets(op, 16)?;
    let masks: Vec<String> = r.sigma_d.iter().map(|b| format!("{b:0w$b}", w = r.n)).collect();
    println!("{name}: period {:?}, sigma_D = {{{}}}", r.period, masks.join(", "));
    let pattern: String = r.cauchy.iter().map(|c| if c.converges { 'c' } else { '.' }).collect();
    println!("  P^(nk) converges for k = 1..12: {pattern}  matches classes: {:?}", r.matches_classes);
    Ok(())
}

fn main() -> hyperbound::Result<()> {
    show("3-cycle", &cycle(3)?)?;
    show("example2(6)", &example2(6)?)?;
    let op = random_block_cyclic(
        BlockCyclicOptions {
            d: 4,
            class_size: 3,
            uneven_mass: true,
        },
        7,
    )?;
    show("random 4-cyclic", &op)
}
