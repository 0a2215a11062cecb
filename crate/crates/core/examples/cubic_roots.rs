//! Roots of the two optimality cubics in the spare capacity `(0, mu - lambda_p)`.
//!
//! ```bash
//! cargo run --example cubic_roots
//! ```

use queue_pricing::cubic::{root_in_interval, CubicSpec};
use queue_pricing::QueueParams;

fn main() -> queue_pricing::Result<()> {
    let queue = QueueParams::new(6.0, 12.0, 0.2)?;
    let c = 0.3;
    let phi0 = queue.spare_capacity();

    for a in [0.15, 3.0, 120.0] {
        let g = CubicSpec::g(queue, a, c);
        let gt = CubicSpec::g_tilde(queue, a, c);
        println!("a = {a}");
        println!("  G  coefficients {:?}", g.coefficients());
        match g.root_in_spare_capacity() {
            Ok(r) => println!("  G  root {:.10} (residual {:.2e}, {} steps)", r.value, r.residual, r.iterations),
            Err(e) => println!("  G  {e}"),
        }
        match gt.root_in_spare_capacity() {
            Ok(r) => println!("  G~ root {:.10}", r.value),
            Err(e) => println!("  G~ {e}"),
        }
        if a == 120.0 {
            // past the spare capacity the G~ root still exists, but the
            // static-priority optimum then sits at the stability limit
            let r = root_in_interval(&gt, phi0, queue.mu() - 1e-9)?;
            println!("  G~ root beyond mu - lambda_p: {:.6}", r.value);
        }
    }
    Ok(())
}
