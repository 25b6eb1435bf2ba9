//! dB/linear conversions. Everything inside the crate is linear with powers in mW.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm → mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

/// Thermal noise power in mW for a density in dBm/Hz over `bandwidth_hz`.
pub fn noise_power_mw(density_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_mw(density_dbm_hz + linear_to_db(bandwidth_hz))
}
