//! Two singular cosine-series measures whose convolution is Lebesgue measure.

use hyperbound::circle::product_pair;

fn main() -> hyperbound::Result<()> {
    for degree in [256, 1024, 4096] {
        let pair = product_pair(degree)?;
        println!(
            "D = {degree:>4}: shifts {:.4} / {:.4} (at 2D {:.4} / {:.4}), refined minima {:.2e} / {:.2e}",
            pair.side1.shift,
            pair.side2.shift,
            pair.side1.shift_at_double_degree,
            pair.side2.shift_at_double_degree,
            pair.side1.refined_min,
            pair.side2.refined_min,
        );
        println!(
            "          convolution defect {:.1e} (oracle), {:.1e} (grid)",
            pair.convolution_defect(1000)?,
            pair.grid_convolution_defect(1000)
        );
    }
    Ok(())
}
