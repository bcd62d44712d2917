//! Decibel conversion relative to the quantum noise limit.
//!
//! `dB = 10·log10(V / S0)`; negative values are below the QNL.

pub fn variance_to_db(variance: f64, qnl: f64) -> f64 {
    10.0 * (variance / qnl).log10()
}

pub fn db_to_variance(db: f64, qnl: f64) -> f64 {
    qnl * 10f64.powf(db / 10.0)
}
