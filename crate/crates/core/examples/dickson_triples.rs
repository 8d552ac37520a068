//! Enumerate primitive Pythagorean triples from Dickson pairs and show the
//! p = 2 shape of each.
//!
//!     cargo run --example dickson_triples -- 100

use fermatlab::barlow_abel::gap_root_n;
use fermatlab::dickson::{enumerate_primitive, p2_decompose, write_csv};

fn main() -> fermatlab::Result<()> {
    let z_max: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let triples = enumerate_primitive(z_max)?;
    for t in &triples {
        let (even, odd) = if t.x.bit(0) { (&t.y, &t.x) } else { (&t.x, &t.y) };
        let shape = p2_decompose(even, odd, &t.z)?;
        let root = gap_root_n(2, &t.x, &t.y, &t.z)?;
        println!(
            "({}, {}, {})  e={} r'={} s={}  2ab K_2 = {} = {}^2",
            t.x,
            t.y,
            t.z,
            shape.e,
            shape.r_prime,
            shape.s,
            root.radicand,
            root.root.expect("p = 2 radicand is a square"),
        );
    }
    println!("{} primitive triples with z <= {z_max}", triples.len());
    write_csv(&triples[..triples.len().min(3)], std::io::stdout())?;
    Ok(())
}
