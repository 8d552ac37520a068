//! Run the claim registry under a small budget, print one line per claim and
//! replay every counterexample.
//!
//!     cargo run --example claim_audit

use fermatlab::audit::{registry, replay_witness, run_all, CheckBudget};

fn main() {
    let budget = CheckBudget::quick();
    let report = run_all(&budget);
    for v in &report.claims {
        let expected = registry().iter().find(|c| c.id == v.id).and_then(|c| c.expected);
        print!("{:<8} {:<19} checked={:<6}", v.id, v.outcome, v.checked_count);
        if let Some(w) = &v.witness {
            let replays = replay_witness(&v.id, w).unwrap_or(false);
            print!(" witness replays: {replays}");
        }
        if expected.is_some_and(|e| e != v.outcome) {
            print!("  (expected {})", expected.unwrap());
        }
        println!();
    }
    println!("{:?}", report.counts);
}
