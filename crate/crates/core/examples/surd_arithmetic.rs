//! Exact arithmetic in Q(sqrt 5) and the continued fraction round trip.

use splitlab::cfq::{cf_to_surd, surd_to_cf, PeriodicCf};
use splitlab::exactnum::Surd;

fn main() -> splitlab::Result<()> {
    // golden mean conjugate (sqrt 5 - 1) / 2
    let omega = Surd::new(-1, 1, 5, 2)?;
    let lambda = omega.add_int(&1.into()).recip()?.add_int(&1.into());
    println!("omega      = {omega}  ~ {}", omega.to_decimal(25));
    println!("1 + 1/(1+omega) = {lambda}");
    println!("omega^2 + omega = {}", &(&omega * &omega) + &omega);
    println!("norm(omega) = {}, conj = {}", omega.norm(), omega.conj());

    for s in ["per:1", "per:2,5", "pre:3,1;per:1,2,2", "pre:4;per:7"] {
        let cf: PeriodicCf = s.parse()?;
        let x = cf_to_surd(&cf);
        let back = surd_to_cf(&x, None)?;
        println!("{s:>20} -> {x} -> {back}");
        assert_eq!(back, cf);
    }

    // non-canonical input is normalised: a repeated period and a pre-period absorbed by rotation
    let cf = PeriodicCf::new(vec![2], vec![1, 2, 1, 2])?;
    println!("pre:2;per:1,2,1,2 is stored as {cf}");
    Ok(())
}
