//! Construction of per-observation design matrices from long-format records.
//!
//! Column layout of every `X_i` (`p x k`):
//!
//! 1. an optional common intercept (a column of ones),
//! 2. one intercept dummy per non-baseline alternative (an identity block),
//! 3. one column per shared-coefficient covariate, holding that covariate's
//!    value for each alternative,
//! 4. `p` columns per alternative-specific covariate, block diagonal, so each
//!    alternative gets its own coefficient.

use self::groups::OrderedGroups;
use serde::{Deserialize, Serialize};

use crate::error::{McqrError, Result};
use crate::model::ChoiceDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub baseline: String,
    /// Full ordered list of alternative labels, baseline included. Inferred from
    /// first appearance in the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<Vec<String>>,
    #[serde(default = "default_true")]
    pub intercepts: bool,
    #[serde(default)]
    pub common_intercept: bool,
    #[serde(default)]
    pub shared: Vec<String>,
    #[serde(default)]
    pub specific: Vec<String>,
}

fn default_true() -> bool {
    true
}

impl DesignConfig {
    pub fn new(baseline: impl Into<String>) -> Self {
        Self {
            baseline: baseline.into(),
            alternatives: None,
            intercepts: true,
            common_intercept: false,
            shared: Vec::new(),
            specific: Vec::new(),
        }
    }

    pub fn with_shared(mut self, names: &[&str]) -> Self {
        self.shared = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_specific(mut self, names: &[&str]) -> Self {
        self.specific = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_alternatives(mut self, labels: &[&str]) -> Self {
        self.alternatives = Some(labels.iter().map(|s| s.to_string()).collect());
        self
    }

    /// Layout of the synthetic generator: labels `0..=3` with baseline `0`,
    /// one shared covariate and one alternative-specific covariate.
    pub fn synthetic() -> Self {
        Self::new("0")
            .with_alternatives(&["0", "1", "2", "3"])
            .with_shared(&["x_shared"])
            .with_specific(&["x_specific"])
    }
}

/// One `(observation, alternative)` record.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRow {
    pub obs_id: String,
    pub alt: String,
    pub chosen: bool,
    /// Values in the order of [`LongTable::covariates`].
    pub values: Vec<f64>,
    /// 1-based line number in the source file, header included; 0 if synthetic.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTable {
    pub covariates: Vec<String>,
    pub rows: Vec<LongRow>,
}

impl LongTable {
    fn covariate_index(&self, name: &str, field: &str) -> Result<usize> {
        self.covariates
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| McqrError::config(field, format!("unknown covariate column `{name}`")))
    }
}

/// Builds a [`ChoiceDataset`] from long-format records.
pub fn build_design_matrix(table: &LongTable, spec: &DesignConfig) -> Result<ChoiceDataset> {
    let mut groups: OrderedGroups<usize> = OrderedGroups::default();
    let mut seen_alts: Vec<String> = Vec::new();
    for (idx, row) in table.rows.iter().enumerate() {
        if row.values.len() != table.covariates.len() {
            return Err(McqrError::ingestion(
                row_number(row, idx),
                format!("expected {} covariate values, found {}", table.covariates.len(), row.values.len()),
            ));
        }
        groups.push(&row.obs_id, idx);
        if !seen_alts.contains(&row.alt) {
            seen_alts.push(row.alt.clone());
        }
    }

    let order: Vec<String> = match &spec.alternatives {
        Some(declared) => {
            if let Some(row) = table.rows.iter().enumerate().find(|(_, r)| !declared.contains(&r.alt)) {
                return Err(McqrError::ingestion(
                    row_number(row.1, row.0),
                    format!("alternative `{}` is not among the declared alternatives", row.1.alt),
                ));
            }
            declared.clone()
        }
        None => seen_alts.clone(),
    };
    if !order.contains(&spec.baseline) {
        return Err(McqrError::config(
            "baseline",
            format!("unknown baseline label `{}`", spec.baseline),
        ));
    }
    let alternatives: Vec<String> = order.iter().filter(|a| **a != spec.baseline).cloned().collect();
    let p = alternatives.len();
    if p == 0 {
        return Err(McqrError::config("alternatives", "no non-baseline alternatives"));
    }

    let shared_idx: Vec<usize> = spec
        .shared
        .iter()
        .map(|c| table.covariate_index(c, "shared"))
        .collect::<Result<_>>()?;
    let specific_idx: Vec<usize> = spec
        .specific
        .iter()
        .map(|c| table.covariate_index(c, "specific"))
        .collect::<Result<_>>()?;

    let mut coef_names = Vec::new();
    if spec.common_intercept {
        coef_names.push("Intercept".to_string());
    }
    if spec.intercepts {
        coef_names.extend(alternatives.iter().map(|a| format!("Intercept({a})")));
    }
    coef_names.extend(spec.shared.iter().cloned());
    for c in &spec.specific {
        coef_names.extend(alternatives.iter().map(|a| format!("{c}({a})")));
    }
    let k = coef_names.len();
    if k == 0 {
        return Err(McqrError::config("design", "design has no columns"));
    }

    // Every observation must carry the same set of alternatives, each exactly once.
    let expected: Vec<&String> = order.iter().filter(|a| seen_alts.contains(a)).collect();
    for a in &alternatives {
        if !seen_alts.contains(a) {
            return Err(McqrError::ingestion(0, format!("no records for alternative `{a}`")));
        }
    }

    let mut obs_ids = Vec::with_capacity(groups.len());
    let mut y = Vec::with_capacity(groups.len());
    let mut x = Vec::with_capacity(groups.len());
    for (obs_id, members) in groups.iter() {
        let first = members[0];
        let mut by_alt: Vec<Option<usize>> = vec![None; order.len()];
        for &idx in members {
            let row = &table.rows[idx];
            let a = order.iter().position(|o| *o == row.alt).expect("validated above");
            if by_alt[a].is_some() {
                return Err(McqrError::ingestion(
                    row_number(row, idx),
                    format!("duplicate record for observation `{obs_id}` and alternative `{}`", row.alt),
                ));
            }
            by_alt[a] = Some(idx);
        }
        if members.len() != expected.len() {
            let missing: Vec<&str> = expected
                .iter()
                .filter(|a| {
                    let pos = order.iter().position(|o| o == **a).unwrap();
                    by_alt[pos].is_none()
                })
                .map(|a| a.as_str())
                .collect();
            return Err(McqrError::ingestion(
                row_number(&table.rows[first], first),
                format!("observation `{obs_id}` is missing alternatives {missing:?}"),
            ));
        }

        let flagged: Vec<usize> = members.iter().copied().filter(|&i| table.rows[i].chosen).collect();
        let label = match flagged.as_slice() {
            [] => 0,
            [idx] => {
                let alt = &table.rows[*idx].alt;
                alternatives.iter().position(|a| a == alt).map_or(0, |j| j + 1)
            }
            [_, second, ..] => {
                return Err(McqrError::ingestion(
                    row_number(&table.rows[*second], *second),
                    format!("observation `{obs_id}` has more than one choice_flag = 1"),
                ))
            }
        };

        let mut block = vec![vec![0.0; k]; p];
        for (j, alt) in alternatives.iter().enumerate() {
            let pos = order.iter().position(|o| o == alt).unwrap();
            let row = &table.rows[by_alt[pos].expect("alternative present")];
            let mut col = 0;
            if spec.common_intercept {
                block[j][col] = 1.0;
                col += 1;
            }
            if spec.intercepts {
                block[j][col + j] = 1.0;
                col += p;
            }
            for &c in &shared_idx {
                block[j][col] = row.values[c];
                col += 1;
            }
            for &c in &specific_idx {
                block[j][col + j] = row.values[c];
                col += p;
            }
        }
        obs_ids.push(obs_id.to_string());
        y.push(label);
        x.push(block);
    }

    ChoiceDataset::new(spec.baseline.clone(), alternatives, coef_names, obs_ids, y, x)
}

fn row_number(row: &LongRow, idx: usize) -> usize {
    if row.line > 0 {
        row.line
    } else {
        idx + 1
    }
}

/// Insertion-ordered grouping of row indices by observation id.
mod groups {
    use std::collections::HashMap;

    #[derive(Default)]
    pub struct OrderedGroups<T> {
        index: HashMap<String, usize>,
        groups: Vec<(String, Vec<T>)>,
    }

    impl<T> OrderedGroups<T> {
        pub fn push(&mut self, key: &str, value: T) {
            match self.index.get(key) {
                Some(&g) => self.groups[g].1.push(value),
                None => {
                    self.index.insert(key.to_string(), self.groups.len());
                    self.groups.push((key.to_string(), vec![value]));
                }
            }
        }

        pub fn len(&self) -> usize {
            self.groups.len()
        }

        pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
            self.groups.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
        }
    }
}
