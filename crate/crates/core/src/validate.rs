//! Small checks shared by the config validators. Each returns an error
//! naming the offending key and the constraint it broke.

use crate::error::{Error, Result};

pub(crate) fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be finite (got {v})")))
    }
}

pub(crate) fn non_negative(key: &str, v: f64) -> Result<()> {
    finite(key, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be ≥ 0 (got {v})")))
    }
}

pub(crate) fn positive(key: &str, v: f64) -> Result<()> {
    finite(key, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be > 0 (got {v})")))
    }
}

pub(crate) fn unit_interval(key: &str, v: f64) -> Result<()> {
    finite(key, v)?;
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be in [0,1] (got {v})")))
    }
}

pub(crate) fn correlation(key: &str, v: f64) -> Result<()> {
    finite(key, v)?;
    if (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be in [-1,1] (got {v})")))
    }
}

pub(crate) fn at_least_one(key: &str, v: u64) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::config(key, "must be ≥ 1 (got 0)"))
    }
}

pub(crate) fn sums_to_one(key: &str, parts: &[f64]) -> Result<()> {
    let total: f64 = parts.iter().sum();
    if (total - 1.0).abs() <= 1e-9 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must sum to 1 (got {total})")))
    }
}
