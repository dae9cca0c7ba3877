//! Lower envelopes h1, h2, h3 over one period and their corners.

use splitlab::envelope::EnvelopeOptions;
use splitlab::report::build_envelope;

fn main() -> splitlab::Result<()> {
    let ratio = std::env::args().nth(1).unwrap_or_else(|| "per:1,3".into());
    let (_, env) = build_envelope(&ratio.parse()?, &EnvelopeOptions::default())?;
    let k = &env.constants;
    println!("{ratio}: period 4 ln lambda = {:.6}, J1 = {:.9}, J2 = {:.9}", k.period, k.j1, k.j2);
    println!("window ({:.6}, {:.6}), primary q = {:?}", env.window.0, env.window.1, env.q_hat);
    for c in env.corners() {
        let curves: Vec<String> = c.curves.iter().map(|r| format!("{}s({},{})", r.mult, r.q, r.n)).collect();
        println!(
            "  {:?} at u = {:.9}: h1 = {:.9}, h2 = {:.9}  [{}]",
            c.kind,
            c.u,
            env.h(1, c.u),
            env.h(2, c.u),
            curves.join(" ")
        );
    }
    let (lo1, hi1) = env.level_extrema(1);
    let (lo2, hi2) = env.level_extrema(2);
    println!("h1 in [{lo1:.9}, {hi1:.9}], h2 in [{lo2:.9}, {hi2:.9}]");
    for s in env.sample(9, 1)? {
        println!("  u = {:>10.5}  h = {:.5?}  S1 = {}  S2 = {}  kappa = {}", s.u, s.h, s.s1, s.s2, s.kappa);
    }
    Ok(())
}
