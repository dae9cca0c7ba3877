//! Critical points of the Melnikov potential at one eps and the size of the splitting.

use splitlab::envelope::EnvelopeOptions;
use splitlab::melnikov::{analyze_eps, SplittingParams};
use splitlab::report::build_envelope;

fn main() -> splitlab::Result<()> {
    let ratio = std::env::args().nth(1).unwrap_or_else(|| "per:1".into());
    let (cat, env) = build_envelope(&ratio.parse()?, &EnvelopeOptions::default())?;
    // halfway between the centre of the window and its upper edge
    let eps = (env.constants.u_hat(env.n_window) + env.constants.ln_lambda).exp();
    let rep = analyze_eps(&cat, Some(&env), &SplittingParams::default(), eps)?;
    println!("{ratio} at eps = {eps:.6e}: S1 = {}, S2 = {}, kappa = {}", rep.s1, rep.s2, rep.kappa);
    println!("eta21 = {:.3e}, eta = {:.3e}, harmonics kept = {}", rep.eta.eta_21, rep.eta.eta, rep.harmonics);
    for z in &rep.zeros {
        println!(
            "  zero theta = ({:.9}, {:.9})  ln m = {:.6}  det ratio = {:.12}",
            z.theta[0], z.theta[1], z.log_min_eig, z.det_ratio
        );
    }
    println!("ln max|M| = {:.6}, ln m* = {:.6}", rep.log_max_m, rep.log_m_star);
    println!("ratio to the leading-order prediction: max {:.6}, m* {:.6}", rep.ratios.max, rep.ratios.mstar);
    Ok(())
}
