//! Distance spectra of the five trellis codes: minimum squared distance,
//! multiplicity per information symbol, and the first spectrum lines.
//!
//! Run with: `cargo run --release --example distance_spectra`

use coop_arq::experiments::throughput::expected_dmin;
use coop_arq::tcm::code::{CodeRate, TrellisCode};
use coop_arq::tcm::spectrum::distance_spectrum;

fn main() -> coop_arq::Result<()> {
    for rate in CodeRate::all() {
        let code = TrellisCode::for_rate(rate);
        let cap = expected_dmin(rate) * 2.0;
        let sp = distance_spectrum(&code, cap)?;
        println!(
            "{} (gen {:?} octal, {} states): d_min^2 = {:.6}, omega(d_min) = {:.6}",
            code.name,
            code.generator_octal,
            code.num_states,
            sp.d_min_sq(),
            sp.omega_min()
        );
        for line in sp.lines.iter().take(6) {
            println!("    d^2 = {:>10.6}   omega/symbol = {:.6}", line.d_sq, line.omega);
        }
    }
    Ok(())
}
