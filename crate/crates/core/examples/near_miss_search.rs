//! Scan x < y < z <= bound for solutions of x^p + y^p = z^p and list the
//! closest misses.
//!
//!     cargo run --release --example near_miss_search -- 3 200

use fermatlab::search::{congruence_stats, near_miss_scan, SearchWindow};
use fermatlab::OddPrime;

fn main() -> fermatlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let bound: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);

    let w = SearchWindow::new(OddPrime::new(p)?, bound, true, 8)?;
    let report = near_miss_scan(&w)?;
    println!(
        "scanned {} triples, {} coprime, {} reached the exact test, {} exact solutions",
        report.scanned,
        report.candidates,
        report.prefilter.exact_tests,
        report.exact_solutions.len()
    );
    for m in &report.near_misses {
        println!("  {:>5} {:>5} {:>5}  gap {}", m.x, m.y, m.z, m.gap);
    }

    let tally = congruence_stats(&w)?;
    println!(
        "(x+y-z)^p = x+y-z mod p on {}/{}; z-y = x mod p on {}/{}",
        tally.fermat_little, tally.triples, tally.z_minus_y_equiv_x, tally.triples
    );
    Ok(())
}
