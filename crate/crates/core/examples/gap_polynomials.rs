//! Build the Fermat gap polynomial, divide it by p*a*b, and reduce the
//! quotient K_p modulo p.
//!
//!     cargo run --example gap_polynomials -- 7

use fermatlab::poly::{build_fg, exact_divide, fermat_gap, k_mod_p, k_poly, pab, point, KMethod};
use fermatlab::{OddPrime, Var};

fn main() -> fermatlab::Result<()> {
    let p: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let op = OddPrime::new(p)?;

    let gap = fermat_gap(p)?;
    let fg = build_fg(op);
    assert_eq!(gap, &fg.f + &fg.g_closed);
    println!("gap has {} terms, content {:?}", gap.len(), gap.content().0.to_string());

    let k = exact_divide(&gap, &pab(p))?;
    assert_eq!(k, k_poly(op, KMethod::Explicit)?);
    println!("K_{p} = {k}");

    let at = point([(Var::X, 5), (Var::A, 5), (Var::B, 2)]);
    println!("K_{p}(x=5, a=5, b=2) = {}", k.evaluate_int(&at)?);

    let reduced = k_mod_p(op)?;
    println!("K_{p}(x=a) mod {p} = {}", reduced.reduced);
    println!("h_{p} = {}", reduced.h);
    Ok(())
}
