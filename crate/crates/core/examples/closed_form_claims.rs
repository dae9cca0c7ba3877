//! Compares closed-form predictions for B0, B1, minimizers and corner counts with the
//! computed values.

use splitlab::envelope::claims::verify_claims;
use splitlab::envelope::EnvelopeOptions;
use splitlab::report::build_envelope;

fn main() -> splitlab::Result<()> {
    for s in ["per:1", "per:4", "per:1,3", "per:1,7", "per:2,5", "per:3,4"] {
        let (mut cat, env) = build_envelope(&s.parse()?, &EnvelopeOptions::default())?;
        let rep = verify_claims(&mut cat, &env)?;
        println!("{s}: B0 = {}, B1 = {}, {}", rep.b0, rep.b1, if rep.all_pass() { "all pass" } else { "MISMATCH" });
        for c in rep.checks.iter().filter(|c| !c.pass) {
            println!("    {}: predicted {}, got {}", c.name, c.predicted, c.observed);
        }
    }
    Ok(())
}
