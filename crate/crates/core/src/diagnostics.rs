//! Posterior summaries and the Gelman–Rubin potential scale reduction factor.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{McqrError, Result};
use crate::gibbs::ChainDraws;

/// Retained draws of several chains over a common parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub names: Vec<String>,
    /// `chains[c][t][p]`: chain `c`, iteration `t`, parameter `p`.
    pub chains: Vec<Vec<Vec<f64>>>,
    pub burn_in_removed: bool,
}

impl PosteriorDraws {
    pub fn new(names: Vec<String>, chains: Vec<Vec<Vec<f64>>>, burn_in_removed: bool) -> Result<Self> {
        let len = chains.first().map(|c| c.len());
        for (c, chain) in chains.iter().enumerate() {
            if Some(chain.len()) != len {
                return Err(McqrError::Diagnostics(format!(
                    "chain {c} has {} iterations, chain 0 has {}",
                    chain.len(),
                    len.unwrap_or(0)
                )));
            }
            if let Some(t) = chain.iter().position(|row| row.len() != names.len()) {
                return Err(McqrError::Diagnostics(format!(
                    "chain {c}, iteration {t}: expected {} values",
                    names.len()
                )));
            }
        }
        Ok(Self {
            names,
            chains,
            burn_in_removed,
        })
    }

    pub fn from_chains(chains: &[ChainDraws]) -> Result<Self> {
        let names = chains
            .first()
            .map(|c| c.names.clone())
            .ok_or_else(|| McqrError::Diagnostics("no chains".into()))?;
        if chains.iter().any(|c| c.names != names) {
            return Err(McqrError::Diagnostics("chains record different parameters".into()));
        }
        Self::new(names, chains.iter().map(|c| c.draws.clone()).collect(), true)
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn n_iter(&self) -> usize {
        self.chains.first().map_or(0, |c| c.len())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Draws of parameter `p`, one vector per chain.
    pub fn per_chain(&self, p: usize) -> Vec<Vec<f64>> {
        self.chains.iter().map(|c| c.iter().map(|row| row[p]).collect()).collect()
    }

    /// All chains of parameter `p` concatenated.
    pub fn pooled(&self, p: usize) -> Vec<f64> {
        self.chains.iter().flat_map(|c| c.iter().map(move |row| row[p])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    /// `(prob, value)` pairs in request order.
    pub quantiles: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub params: Vec<ParamSummary>,
}

impl Summary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Shifted by the first value, so constant input gives that value exactly.
pub fn mean(x: &[f64]) -> f64 {
    let Some(&x0) = x.first() else {
        return f64::NAN;
    };
    x0 + x.iter().map(|v| v - x0).sum::<f64>() / x.len() as f64
}

/// Sample variance with divisor `n - 1`; zero for fewer than two values.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Quantile by linear interpolation between order statistics (type 7).
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Pooled mean, SD, median and the requested quantiles per parameter.
pub fn summarize(draws: &PosteriorDraws, probs: &[f64]) -> Result<Summary> {
    if draws.n_chains() == 0 || draws.n_iter() == 0 {
        return Err(McqrError::Diagnostics("cannot summarise an empty draw set".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(McqrError::Diagnostics(format!("quantile probability {p} outside [0, 1]")));
    }
    let params = (0..draws.names.len())
        .map(|p| {
            let mut x = draws.pooled(p);
            let m = mean(&x);
            let sd = variance(&x).sqrt();
            x.sort_by(f64::total_cmp);
            ParamSummary {
                name: draws.names[p].clone(),
                mean: m,
                sd,
                median: quantile_sorted(&x, 0.5),
                quantiles: probs.iter().map(|&q| (q, quantile_sorted(&x, q))).collect(),
            }
        })
        .collect();
    Ok(Summary { params })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhatEntry {
    pub name: String,
    pub rhat: f64,
    /// Mean within-chain variance.
    pub within: f64,
    /// `n` times the variance of the chain means.
    pub between: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhatReport {
    pub entries: Vec<RhatEntry>,
    pub split: bool,
}

impl RhatReport {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.rhat).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&RhatEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn rhat_of(chains: &[Vec<f64>]) -> (f64, f64, f64) {
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = chains.iter().map(|c| variance(c)).sum::<f64>() / chains.len() as f64;
    let between = n * variance(&means);
    let var_plus = (n - 1.0) / n * within + between / n;
    let rhat = if within > 0.0 {
        (var_plus / within).sqrt()
    } else if between > 0.0 {
        f64::INFINITY
    } else {
        // Every draw identical: nothing to diagnose.
        ((n - 1.0) / n).sqrt()
    };
    (rhat, within, between)
}

/// Classic potential scale reduction factor per parameter.
pub fn rhat(draws: &PosteriorDraws) -> Result<RhatReport> {
    rhat_impl(draws, false)
}

/// As [`rhat`] but with every chain split into two halves first.
pub fn split_rhat(draws: &PosteriorDraws) -> Result<RhatReport> {
    rhat_impl(draws, true)
}

fn rhat_impl(draws: &PosteriorDraws, split: bool) -> Result<RhatReport> {
    if draws.n_chains() < 2 && !split {
        return Err(McqrError::Diagnostics(
            "R-hat needs at least two chains; rerun with --chains 2 or more".into(),
        ));
    }
    let min_iter = if split { 4 } else { 2 };
    if draws.n_iter() < min_iter {
        return Err(McqrError::Diagnostics(format!(
            "R-hat needs at least {min_iter} retained iterations per chain, got {}",
            draws.n_iter()
        )));
    }
    let entries = (0..draws.names.len())
        .map(|p| {
            let mut chains = draws.per_chain(p);
            if split {
                let half = draws.n_iter() / 2;
                chains = chains
                    .into_iter()
                    .flat_map(|c| {
                        let off = c.len() - half;
                        vec![c[..half].to_vec(), c[off..].to_vec()]
                    })
                    .collect();
            }
            let (rhat, within, between) = rhat_of(&chains);
            RhatEntry {
                name: draws.names[p].clone(),
                rhat,
                within,
                between,
            }
        })
        .collect();
    Ok(RhatReport { entries, split })
}

/// Side-by-side Mean/SD (and optionally median) columns, one group per tau.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub taus: Vec<f64>,
    pub rows: Vec<String>,
    /// `cells[r][t]` = (mean, sd, median) of row `r` under tau `t`.
    pub cells: Vec<Vec<Option<(f64, f64, f64)>>>,
    pub with_median: bool,
}

impl SummaryTable {
    /// Rows are the union of parameter names in first-seen order.
    pub fn new(per_tau: &[(f64, Summary)], with_median: bool) -> Self {
        let mut rows: Vec<String> = Vec::new();
        for (_, s) in per_tau {
            for p in &s.params {
                if !rows.contains(&p.name) {
                    rows.push(p.name.clone());
                }
            }
        }
        let cells = rows
            .iter()
            .map(|r| {
                per_tau
                    .iter()
                    .map(|(_, s)| s.get(r).map(|p| (p.mean, p.sd, p.median)))
                    .collect()
            })
            .collect();
        Self {
            taus: per_tau.iter().map(|(t, _)| *t).collect(),
            rows,
            cells,
            with_median,
        }
    }

    fn stats_per_tau(&self) -> usize {
        if self.with_median {
            3
        } else {
            2
        }
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["param".to_string()];
        for t in &self.taus {
            h.push(format!("mean_tau{t}"));
            h.push(format!("sd_tau{t}"));
            if self.with_median {
                h.push(format!("median_tau{t}"));
            }
        }
        h
    }

    fn values(&self, r: usize) -> Vec<Option<f64>> {
        self.cells[r]
            .iter()
            .flat_map(|c| {
                let (m, s, med) = match c {
                    Some((m, s, med)) => (Some(*m), Some(*s), Some(*med)),
                    None => (None, None, None),
                };
                let mut v = vec![m, s];
                if self.with_median {
                    v.push(med);
                }
                v
            })
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for (r, name) in self.rows.iter().enumerate() {
            let mut rec = vec![name.clone()];
            rec.extend(self.values(r).into_iter().map(|v| v.map_or(String::new(), |x| format!("{x:.16e}"))));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned text with four decimals.
    pub fn to_text(&self) -> String {
        let name_w = self.rows.iter().map(|r| r.len()).max().unwrap_or(5).max(5);
        let col_w = 10;
        let mut s = String::new();
        let _ = write!(s, "{:name_w$}", "");
        let group_w = col_w * self.stats_per_tau();
        for t in &self.taus {
            let _ = write!(s, "{:>group_w$}", format!("tau = {t}"));
        }
        s.push('\n');
        let _ = write!(s, "{:name_w$}", "");
        for _ in &self.taus {
            let _ = write!(s, "{:>col_w$}{:>col_w$}", "Mean", "SD");
            if self.with_median {
                let _ = write!(s, "{:>col_w$}", "Median");
            }
        }
        s.push('\n');
        for (r, name) in self.rows.iter().enumerate() {
            let _ = write!(s, "{name:name_w$}");
            for v in self.values(r) {
                match v {
                    Some(x) => {
                        let _ = write!(s, "{x:>col_w$.4}");
                    }
                    None => {
                        let _ = write!(s, "{:>col_w$}", "-");
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

impl RhatReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "rhat", "within", "between"])?;
        for e in &self.entries {
            w.write_record([
                e.name.clone(),
                format!("{:.16e}", e.rhat),
                format!("{:.16e}", e.within),
                format!("{:.16e}", e.between),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let name_w = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:name_w$}{:>10}\n", "", if self.split { "split R" } else { "R-hat" });
        for e in &self.entries {
            let _ = writeln!(s, "{:name_w$}{:>10.4}", e.name, e.rhat);
        }
        s
    }
}
