//! Screen every bus fault without storage and list the most severe.

use bess_siting::study::{Prepared, StudyConfig};

fn main() -> bess_siting::Result<()> {
    let prep = Prepared::new(StudyConfig::default())?;
    println!("{:>4} {:>10} {:>9} {:>8}", "rank", "fault bus", "SI", "buses");
    for (r, c) in prep.ranking.iter().take(10).enumerate() {
        println!("{:>4} {:>10} {:>9.5} {:>8}", r + 1, c.contingency.fault_bus, c.si, c.mask.violated_buses().len());
    }
    Ok(())
}
