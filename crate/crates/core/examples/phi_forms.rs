//! Evaluate phi_p and its A_p / D_p rewritings, then classify
//! gcd(z - y, phi_p(z, y)) over a small window.
//!
//!     cargo run --example phi_forms

use fermatlab::forms::{ad_forms, classify_gcd, phi};
use fermatlab::{Integer, OddPrime};

fn main() -> fermatlab::Result<()> {
    let p = OddPrime::new(5)?;
    let (z, y) = (Integer::from(7), Integer::from(3));

    let plain = ad_forms(p, &z, &y, false);
    println!("phi_5(7, 3) = {}", phi(p, &z, &y));
    println!("  A + (zy)^k  = {}", plain.via_a());
    println!("  D + 5(zy)^k = {}", plain.via_d());

    let alt = ad_forms(p, &z, &y, true);
    println!("phi_5(7, -3) = {} (holds: {})", alt.phi, alt.holds());

    let mut divisible = 0;
    let mut total = 0;
    for z in 2..=40u32 {
        for y in 1..z {
            let (y, z) = (Integer::from(y), Integer::from(z));
            let Ok(class) = classify_gcd(p, &y, &z) else { continue };
            total += 1;
            if class.divides {
                divisible += 1;
                assert_eq!(class.g, Integer::from(5));
                assert_eq!(class.phi_valuation, 1);
            }
        }
    }
    println!("coprime pairs up to 40: {total}, with 5 | z - y: {divisible}");
    Ok(())
}
