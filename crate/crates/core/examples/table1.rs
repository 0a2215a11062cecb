//! Reference parameter set: computed optima next to the published values.
//!
//! ```bash
//! cargo run --example table1
//! ```

use queue_pricing::cli::compare_table1;
use queue_pricing::table1;

fn main() {
    let market = table1::market();
    println!("{:>6} {:>9} {:>9} {:>9} {:>10} {:>9} {:>10}  note", "S_p", "beta", "lambda_s", "theta", "S_s", "revenue", "published");
    for c in compare_table1() {
        let (p, q) = (c.published, c.computed);
        let note = match (c.matches, c.inconsistent_row) {
            (true, _) => String::new(),
            (false, true) => format!("printed theta disagrees with its own row (implied {:.2})", p.implied_theta(&market)),
            (false, false) => "printed to fewer digits than the comparison".to_string(),
        };
        println!(
            "{:>6} {:>9} {:>9.5} {:>9.2} {:>10.5} {:>9.2} {:>10.2}  {note}",
            p.s_p,
            format!("{:.4}", q.beta),
            q.lambda_s,
            q.theta,
            q.s_s,
            q.revenue,
            p.revenue
        );
    }
}
