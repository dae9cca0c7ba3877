//! Primitive resonances, the primary sequence and the separations B0, B1.

use num_rational::BigRational;
use splitlab::cfq::{build_spectral, PeriodicCf};
use splitlab::resonance::ResonanceCatalog;

fn main() -> splitlab::Result<()> {
    let cf: PeriodicCf = std::env::args().nth(1).unwrap_or_else(|| "per:1,3".into()).parse()?;
    let sd = build_spectral(&cf)?;
    let mut cat = ResonanceCatalog::build(&sd, &BigRational::from_integer(12.into()))?;
    let primary = cat.find_primary();
    println!("{cf}: primary q = {:?}, delta* = {}, gamma* ~ {:.9}", primary.q_hat, primary.delta_star, primary.gamma_star.to_f64());
    println!("{:>5} {:>5} {:>8} {:>10} {:>12} {:>9}", "q", "p", "delta", "gamma~", "K_q", "essential");
    for r in cat.records() {
        println!(
            "{:>5} {:>5} {:>8} {:>10} {:>12.6} {:>9}",
            r.q, r.p, r.delta, r.gamma_tilde, r.k_factor_f64, r.essential
        );
    }
    let sep = cat.separations()?;
    println!("B0 = {} at q1 = {:?}", sep.b0, sep.q1);
    println!("B1 = {} at q2 = {:?}", sep.b1, sep.q2);

    // the sequence s(q, n) = U^n k0(q) and its normalized numerator converging to gamma~*
    let r = cat.record(primary.q_hat[0]).expect("primary is catalogued").clone();
    for n in 0..5 {
        let t = cat.sequence_term(&r, n)?;
        println!("s({}, {n}) = {}  gamma~ = {:.12}", t.q, t.k, t.gamma_tilde);
    }
    Ok(())
}
