//! Mode lists from flags with the dispatch environment as fallback.

use std::collections::HashMap;

use ozgemm::dispatch::{parse_mode_config, ENV_MODE};
use ozgemm::{EmulationMode, Result};

pub fn environment() -> HashMap<String, String> {
    std::env::vars().collect()
}

/// A bare `ozaki1`/`ozaki2` takes its parameter from `GEMM_EMU_SLICES`,
/// `GEMM_EMU_STRATEGY` or `GEMM_EMU_MODULI`.
pub fn parse_mode(token: &str, env: &HashMap<String, String>) -> Result<EmulationMode> {
    if token.contains(':') {
        return token.parse();
    }
    let mut env = env.clone();
    env.insert(ENV_MODE.to_string(), token.to_string());
    parse_mode_config(&env)
}

pub fn parse_modes(tokens: &[String], env: &HashMap<String, String>) -> Result<Vec<EmulationMode>> {
    tokens.iter().filter(|t| !t.trim().is_empty()).map(|t| parse_mode(t.trim(), env)).collect()
}

/// Native, then Ozaki-II with 10..=18 moduli, then Ozaki-I with 4..=8 slices.
pub fn precision_ladder() -> Vec<EmulationMode> {
    let mut modes = vec![EmulationMode::Native];
    modes.extend((10..=18).step_by(2).map(EmulationMode::ozaki2));
    modes.extend((4..=8).map(EmulationMode::ozaki1));
    modes
}

/// Native plus the configured mode when `GEMM_EMU_MODE` selects one,
/// otherwise the whole ladder.
pub fn parse_mode_config_or_ladder(env: &HashMap<String, String>) -> Result<Vec<EmulationMode>> {
    match parse_mode_config(env)? {
        EmulationMode::Native if env.get(ENV_MODE).is_none_or(|v| v.trim().is_empty()) => Ok(precision_ladder()),
        EmulationMode::Native => Ok(vec![EmulationMode::Native]),
        mode => Ok(vec![EmulationMode::Native, mode]),
    }
}
