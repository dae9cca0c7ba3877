//! Splitting measures over one period, with points near transitions flagged.

use splitlab::envelope::EnvelopeOptions;
use splitlab::melnikov::{sweep, SplittingParams};
use splitlab::report::{build_envelope, sweep_csv, sweep_grid};

fn main() -> splitlab::Result<()> {
    let ratio = std::env::args().nth(1).unwrap_or_else(|| "per:2".into());
    let (cat, env) = build_envelope(&ratio.parse()?, &EnvelopeOptions::default())?;
    let rows = sweep(&cat, Some(&env), &SplittingParams::default(), &sweep_grid(&env, 32, 1));
    print!("{}", sweep_csv(&rows, &env, 0.05));
    let flagged = rows.iter().filter(|r| r.near_transition).count();
    eprintln!("{flagged} of {} points have eta >= 0.1", rows.len());
    Ok(())
}
