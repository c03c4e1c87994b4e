//! Manual timing/accuracy pilot for the long critical-chain runs.
//! Run with: cargo test -p tfd-core --test scaling_pilot -- --ignored --nocapture

use std::time::Instant;

use tfd_core::evolution::{evolve, EvolutionConfig};
use tfd_core::models::{build_bond_terms, ModelKind, ModelSpec};
use tfd_core::oracle::free_fermion;
use tfd_core::PurificationMPS;

#[test]
#[ignore]
fn xx_chain_pilot() {
    let len = 64usize;
    let spec = ModelSpec::new(ModelKind::XxzHalf { delta: 0.0 }, len).unwrap();
    let terms = build_bond_terms(&spec).unwrap();
    for (dtau, cutoff, pad) in [(0.2, 1e-9, 32usize), (0.4, 1e-9, 32)] {
        let mut st = PurificationMPS::infinite_temperature(2, len).unwrap();
        let mut config = EvolutionConfig::new(8.0, dtau, 4);
        config.policy.rel_weight_cutoff = cutoff;
        config.policy.rank_pad = pad;
        config.measure_betas = vec![2.0, 4.0, 8.0];
        let t0 = Instant::now();
        let mut rows = Vec::new();
        evolve(&mut st, &terms, &config, &mut |s| {
            let s1 = s.spectra[len / 2 - 1].renyi_entropy(1.0).unwrap();
            let d = s.bond_dimensions[len / 2 - 1];
            rows.push((s.beta, s1, d, t0.elapsed().as_secs_f64()));
        })
        .unwrap();
        println!("dtau={dtau} cutoff={cutoff:.0e} pad={pad}:");
        for (beta, s1, d, t) in rows {
            let s1_ff = free_fermion::tds_renyi(len, beta, len / 2, 1.0);
            println!(
                "  beta={beta:5.1} S1={s1:.8} err={:+.3e} D={d:4} t={t:7.1}s",
                s1 - s1_ff
            );
        }
    }
}
