//! Period matrix T, iteration matrix U, eigenvalue lambda and sigma for a few ratios.

use splitlab::cfq::{build_spectral, PeriodicCf};

fn main() -> splitlab::Result<()> {
    for s in ["per:1", "per:3", "per:1,3", "per:2,5", "per:1,2,2", "pre:2;per:1,3"] {
        let cf: PeriodicCf = s.parse()?;
        let sd = build_spectral(&cf)?;
        println!("{s}  ({:?})", cf.class());
        println!("  Omega  = {} ~ {:.12}", sd.omega, sd.omega_f64());
        println!("  T      = {}  det = {}", sd.t, sd.t.det());
        println!("  U      = {}", sd.u);
        println!("  lambda = {} ~ {:.12}, sigma = {}", sd.lambda, sd.lambda_f64(), sd.sigma);
        if !cf.is_purely_periodic() {
            let tail = build_spectral(&cf.tail())?;
            println!("  tail {} has T = {}", cf.tail(), tail.t);
        }
    }
    Ok(())
}
