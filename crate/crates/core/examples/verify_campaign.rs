//! A small verification campaign: metallic a <= 20 and two-periodic b <= 8.

use splitlab::envelope::EnvelopeOptions;
use splitlab::report::{campaign, campaign_ratios, campaign_table};

fn main() -> splitlab::Result<()> {
    let ratios = campaign_ratios(20, 8)?;
    let rows = campaign(&ratios, &EnvelopeOptions::default(), 7, 200.0);
    print!("{}", campaign_table(&rows));
    let bad: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.ratio.as_str()).collect();
    println!("{} ratios, failing: {bad:?}", rows.len());
    Ok(())
}
