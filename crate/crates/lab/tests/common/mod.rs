#![allow(dead_code)]

use ardl_lab::RunConfig;

/// A pipeline config small enough for debug-build tests.
pub fn small_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.seed = 11;
    cfg.synthetic.entities = 6;
    cfg.synthetic.years = 14;
    cfg.synthetic.missing_fraction = 0.05;
    cfg.synthetic.seed = 5;
    cfg.impute.trees = 12;
    cfg.impute.max_rounds = 3;
    cfg.rollcorr.replications = 100;
    cfg.ardl.p_max = 2;
    cfg.bounds.replications = 99;
    cfg.diagnostics.replications = 99;
    cfg
}

pub fn read(path: &std::path::Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
