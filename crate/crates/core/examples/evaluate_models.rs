//! Mean path loss and shadowing spread of the reference models at a few
//! distances, plus the two-ray breakpoint for the measurement geometry.
//!
//! cargo run --example evaluate_models

use v2v_fading::pathloss::{reference, theoretical_breakpoint, LinkClass};

fn main() -> v2v_fading::Result<()> {
    let models = [
        ("ss", reference::single_slope()),
        ("per_class", reference::per_class()),
        ("dsss", reference::dsss()),
        ("dsds", reference::dsds()),
    ];
    println!("{:>8} {:>10} {:>8} {:>8} {:>8}", "d_m", "model", "link", "PL_dB", "sigma");
    for d in [10.0, 35.0, 100.0, 500.0, 1000.0] {
        for (name, m) in &models {
            let links: &[LinkClass] = if m.requires_link_class() { &LinkClass::LABELLED } else { &[LinkClass::Unknown] };
            for &link in links {
                println!(
                    "{d:>8} {name:>10} {:>8} {:>8.2} {:>8.2}",
                    link.as_str(),
                    m.mean_path_loss(d, link)?,
                    m.shadowing_sigma(d, link)?
                );
            }
        }
    }
    let d_f = theoretical_breakpoint(1.75, 1.75, 725e6)?;
    println!("two-ray breakpoint at 725 MHz, antennas 1.75 m: {d_f:.1} m");
    Ok(())
}
