//! Classify triples against the Barlow-Abel relation shapes and compute the
//! p-th root test on p*a*b*K_p.
//!
//!     cargo run --example barlow_abel_shapes

use fermatlab::barlow_abel::{decompose, gap_root, CandidateTriple};
use fermatlab::OddPrime;

fn main() -> fermatlab::Result<()> {
    let cases = [(3, 6, 8, 9), (3, 3, 5, 6), (5, 1, 2, 3), (7, 2, 3, 4)];
    for (p, x, y, z) in cases {
        let d = decompose(OddPrime::new(p)?, &CandidateTriple::new(x, y, z)?);
        let g = gap_root(&d)?;
        println!(
            "p={p} ({x}, {y}, {z}): shape {:?}, p-divisible {:?}, K={}, radicand={}, exact root: {}, residual {}",
            d.shape, d.p_divisible, g.k, g.radicand, g.exact, g.residual
        );
        assert!(g.master_identity_holds(&d.x, &d.a));
        assert!(d.linear_identities_hold());
    }
    Ok(())
}
