//! Markov and Chebyshev bounds on the erasure probability at list size `L`.

use crate::error::{Error, Result};

/// `1 / L`, valid in the high-SNR regime where `E[N_LVA] -> 1`.
pub fn markov_list_bound(list_size: u64) -> Result<f64> {
    if list_size == 0 {
        return Err(Error::InvalidArgument("list size must be at least 1".into()));
    }
    Ok(1.0 / list_size as f64)
}

/// `var(N_LVA) / (L - 1)^2`.
pub fn chebyshev_list_bound(var_nlva: f64, list_size: u64) -> Result<f64> {
    if list_size < 2 {
        return Err(Error::InvalidArgument(
            "the Chebyshev bound needs L >= 2".into(),
        ));
    }
    if !(var_nlva >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance must be nonnegative, got {var_nlva}")));
    }
    let gap = (list_size - 1) as f64;
    Ok(var_nlva / (gap * gap))
}

/// Smallest `L >= 2` whose Chebyshev bound meets `p_nack_target`.
pub fn min_list_for_targets(var_nlva: f64, p_nack_target: f64) -> Result<u64> {
    if !(p_nack_target > 0.0) {
        return Err(Error::InvalidArgument("target must be positive".into()));
    }
    chebyshev_list_bound(var_nlva, 2)?;
    let mut l = ((var_nlva / p_nack_target).sqrt() + 1.0).floor().max(2.0) as u64;
    while l > 2 && chebyshev_list_bound(var_nlva, l - 1)? <= p_nack_target {
        l -= 1;
    }
    while chebyshev_list_bound(var_nlva, l)? > p_nack_target {
        l += 1;
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_arithmetic() {
        assert_eq!(min_list_for_targets(0.2823, 1e-3).unwrap(), 18);
        assert!(chebyshev_list_bound(0.2823, 18).unwrap() <= 1e-3);
        assert!(chebyshev_list_bound(0.2823, 17).unwrap() > 1e-3);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(markov_list_bound(1).unwrap(), 1.0);
        assert!(markov_list_bound(0).is_err());
        assert!(chebyshev_list_bound(1.0, 1).is_err());
        for l in 2..50 {
            assert_eq!(chebyshev_list_bound(0.0, l).unwrap(), 0.0);
        }
        assert_eq!(min_list_for_targets(0.0, 1e-6).unwrap(), 2);
    }

    #[test]
    fn minimal_list_is_minimal() {
        for var in [0.01, 0.5, 3.0, 17.0] {
            for target in [1e-1, 1e-3, 1e-5] {
                let l = min_list_for_targets(var, target).unwrap();
                assert!(chebyshev_list_bound(var, l).unwrap() <= target);
                if l > 2 {
                    assert!(chebyshev_list_bound(var, l - 1).unwrap() > target);
                }
            }
        }
    }
}
