use crate::error::{CliError, Result};

/// Arithmetic mean and sample standard deviation (`n - 1` denominator, 0 for
/// a single value).
pub fn summarize(scores: &[f64]) -> Result<(f64, f64)> {
    if scores.is_empty() {
        return Err(CliError::usage("cannot summarize an empty score list"));
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    if scores.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = scores.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(summarize(&[64.0, 64.0, 64.0]).unwrap(), (64.0, 0.0));
        assert_eq!(summarize(&[1.0, 2.0, 3.0]).unwrap(), (2.0, 1.0));
        assert_eq!(summarize(&[5.0]).unwrap(), (5.0, 0.0));
        assert!(summarize(&[]).is_err());
    }
}
