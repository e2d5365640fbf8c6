//! Birth and death rate models. State 0 never has births or deaths.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, FbdpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateModel {
    /// λₙ = nλ, μₙ = nμ
    Linear { lambda: f64, mu: f64 },
    /// λₙ = μₙ = nλ
    Equal { lambda: f64 },
    /// explicit rates for states 0..=n_max
    Table { lambdas: Vec<f64>, mus: Vec<f64> },
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(FbdpError::InvalidParameter(format!(
            "{name} must be a finite nonnegative rate, got {v}"
        )));
    }
    Ok(())
}

impl RateModel {
    pub fn linear(lambda: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("mu", mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FbdpError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(RateModel::Linear { lambda, mu })
    }

    pub fn equal(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(FbdpError::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(RateModel::Equal { lambda })
    }

    pub fn table(lambdas: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if lambdas.len() != mus.len() {
            return Err(FbdpError::InvalidParameter(format!(
                "rate sequences differ in length ({} vs {})",
                lambdas.len(),
                mus.len()
            )));
        }
        if lambdas.is_empty() {
            return Err(FbdpError::InvalidParameter("empty rate table".into()));
        }
        for (i, (&l, &m)) in lambdas.iter().zip(&mus).enumerate() {
            check_rate(&format!("lambda[{i}]"), l)?;
            check_rate(&format!("mu[{i}]"), m)?;
        }
        if lambdas[0] != 0.0 || mus[0] != 0.0 {
            return Err(FbdpError::InvalidParameter(
                "state 0 must have zero birth and death rates".into(),
            ));
        }
        Ok(RateModel::Table { lambdas, mus })
    }

    /// Largest state with defined rates; None for unbounded linear models.
    pub fn n_max(&self) -> Option<usize> {
        match self {
            RateModel::Table { lambdas, .. } => Some(lambdas.len() - 1),
            _ => None,
        }
    }

    /// (λ, μ) per individual for linear and equal models.
    pub fn linear_params(&self) -> Option<(f64, f64)> {
        match *self {
            RateModel::Linear { lambda, mu } => Some((lambda, mu)),
            RateModel::Equal { lambda } => Some((lambda, lambda)),
            RateModel::Table { .. } => None,
        }
    }

    fn extent(&self, n: usize) -> Result<()> {
        match self.n_max() {
            Some(n_max) if n > n_max => Err(FbdpError::TableExtent { n, n_max }),
            _ => Ok(()),
        }
    }

    pub fn lambda_at(&self, n: usize) -> Result<f64> {
        self.extent(n)?;
        Ok(match self {
            RateModel::Linear { lambda, .. } | RateModel::Equal { lambda } => n as f64 * lambda,
            RateModel::Table { lambdas, .. } => lambdas[n],
        })
    }

    pub fn mu_at(&self, n: usize) -> Result<f64> {
        self.extent(n)?;
        Ok(match self {
            RateModel::Linear { mu, .. } => n as f64 * mu,
            RateModel::Equal { lambda } => n as f64 * lambda,
            RateModel::Table { mus, .. } => mus[n],
        })
    }

    /// Λₙ = λₙ + μₙ
    pub fn big_lambda(&self, n: usize) -> Result<f64> {
        Ok(self.lambda_at(n)? + self.mu_at(n)?)
    }

    /// θₙ = λₙ μ_{n+1}
    pub fn theta(&self, n: usize) -> Result<f64> {
        Ok(self.lambda_at(n)? * self.mu_at(n + 1)?)
    }

    /// Multiply every rate by c.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match self {
            RateModel::Linear { lambda, mu } => RateModel::linear(lambda * c, mu * c),
            RateModel::Equal { lambda } => RateModel::equal(lambda * c),
            RateModel::Table { lambdas, mus } => RateModel::table(
                lambdas.iter().map(|v| v * c).collect(),
                mus.iter().map(|v| v * c).collect(),
            ),
        }
    }

    /// Explicit table for states 0..=n_max.
    pub fn to_table(&self, n_max: usize) -> Result<Self> {
        let lambdas = (0..=n_max)
            .map(|n| self.lambda_at(n))
            .collect::<Result<Vec<_>>>()?;
        let mus = (0..=n_max)
            .map(|n| self.mu_at(n))
            .collect::<Result<Vec<_>>>()?;
        RateModel::table(lambdas, mus)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(f)
    }

    /// Reads a `n,lambda,mu` table with rows for n = 0..n_max in order.
    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr
            .headers()
            .map_err(|e| FbdpError::Parse {
                line: 1,
                msg: e.to_string(),
            })?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["n", "lambda", "mu"] {
            return Err(FbdpError::Parse {
                line: 1,
                msg: format!("expected header n,lambda,mu, found {}", names.join(",")),
            });
        }
        let mut lambdas = Vec::new();
        let mut mus = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| FbdpError::Parse {
                line,
                msg: e.to_string(),
            })?;
            if rec.len() != 3 {
                return Err(FbdpError::Parse {
                    line,
                    msg: format!("expected 3 fields, found {}", rec.len()),
                });
            }
            let n: usize = rec[0].parse().map_err(|_| FbdpError::Parse {
                line,
                msg: format!("bad state index '{}'", &rec[0]),
            })?;
            if n != lambdas.len() {
                return Err(FbdpError::Parse {
                    line,
                    msg: format!("expected state {}, found {n}", lambdas.len()),
                });
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                let v: f64 = s.parse().map_err(|_| FbdpError::Parse {
                    line,
                    msg: format!("bad {what} '{s}'"),
                })?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(FbdpError::Parse {
                        line,
                        msg: format!("{what} must be finite and nonnegative, got {s}"),
                    });
                }
                Ok(v)
            };
            let l = parse(&rec[1], "lambda")?;
            let m = parse(&rec[2], "mu")?;
            if n == 0 && (l != 0.0 || m != 0.0) {
                return Err(FbdpError::Parse {
                    line,
                    msg: "state 0 must have lambda = mu = 0".into(),
                });
            }
            lambdas.push(l);
            mus.push(m);
        }
        RateModel::table(lambdas, mus)
    }
}

/// Order α ∈ (0, 1] of the fractional time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(FractionalOrder(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let m = RateModel::linear(2.0, 1.0).unwrap();
        assert_eq!(m.lambda_at(3).unwrap(), 6.0);
        assert_eq!(m.big_lambda(2).unwrap(), 6.0);
        assert_eq!(m.theta(2).unwrap(), 12.0);
        assert_eq!(m.big_lambda(0).unwrap(), 0.0);
        assert_eq!(m.theta(0).unwrap(), 0.0);
        let t = RateModel::table(vec![0.0, 1.0, 4.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.lambda_at(2).unwrap(), 4.0);
        assert_eq!(t.mu_at(0).unwrap(), 0.0);
        assert_eq!(t.theta(1).unwrap(), 3.0);
        assert!(matches!(
            t.lambda_at(3),
            Err(FbdpError::TableExtent { n: 3, n_max: 2 })
        ));
        assert!(t.theta(2).is_err());
    }

    #[test]
    fn csv_round_and_errors() {
        let ok = "n,lambda,mu\n0,0,0\n1,1.5,2\n2,3,4\n";
        let m = RateModel::from_csv_reader(ok.as_bytes()).unwrap();
        assert_eq!(m.mu_at(2).unwrap(), 4.0);
        let bad = "n,lambda,mu\n0,0,0\n1,x,2\n";
        match RateModel::from_csv_reader(bad.as_bytes()) {
            Err(FbdpError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let gap = "n,lambda,mu\n0,0,0\n2,1,1\n";
        assert!(matches!(
            RateModel::from_csv_reader(gap.as_bytes()),
            Err(FbdpError::Parse { line: 3, .. })
        ));
        let neg = "n,lambda,mu\n0,0,0\n1,-1,1\n";
        assert!(RateModel::from_csv_reader(neg.as_bytes()).is_err());
        let immig = "n,lambda,mu\n0,1,0\n1,1,1\n";
        assert!(matches!(
            RateModel::from_csv_reader(immig.as_bytes()),
            Err(FbdpError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn order_validation() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0).unwrap().is_classical());
        assert!(FractionalOrder::new(1.0001).is_err());
    }
}
