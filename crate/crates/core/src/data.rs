//! Discrete datasets and their reduction to stratified contingency tables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A categorical variable with an ordered list of level labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, levels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if levels.is_empty() {
            return Err(Error::InvalidData(format!("variable {name} has no levels")));
        }
        for (i, l) in levels.iter().enumerate() {
            if levels[..i].contains(l) {
                return Err(Error::InvalidData(format!(
                    "variable {name} declares level {l} twice"
                )));
            }
        }
        Ok(Self { name, levels })
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }
}

/// Observations of discrete variables, stored column-major as 0-based level
/// indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDataset {
    variables: Vec<Variable>,
    columns: Vec<Vec<u32>>,
    n: usize,
}

impl DiscreteDataset {
    /// Builds a dataset from per-variable columns of level indices.
    pub fn from_columns(variables: Vec<Variable>, columns: Vec<Vec<u32>>) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} variables but {} columns",
                variables.len(),
                columns.len()
            )));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidData(format!("duplicate variable {}", v.name)));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        for (v, col) in variables.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column {} has {} rows, expected {n}",
                    v.name,
                    col.len()
                )));
            }
            let card = v.cardinality() as u32;
            if let Some(row) = col.iter().position(|&x| x >= card) {
                return Err(Error::InvalidData(format!(
                    "row {row}: level index {} out of range for {}",
                    col[row], v.name
                )));
            }
        }
        Ok(Self { variables, columns, n })
    }

    /// Builds a dataset from row vectors of level indices.
    pub fn from_rows(variables: Vec<Variable>, rows: &[Vec<u32>]) -> Result<Self> {
        let p = variables.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::InvalidData(format!(
                    "row {r} has {} fields, expected {p}",
                    row.len()
                )));
            }
            for (col, &x) in columns.iter_mut().zip(row) {
                col.push(x);
            }
        }
        Self::from_columns(variables, columns)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn column(&self, idx: usize) -> &[u32] {
        &self.columns[idx]
    }

    pub fn cardinality(&self, idx: usize) -> usize {
        self.variables[idx].cardinality()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn row(&self, r: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Mixed-radix configuration code of `vars` for every row (first variable
    /// slowest) and the number of possible configurations.
    pub fn config_codes(&self, vars: &[usize]) -> Result<(Vec<u64>, u64)> {
        let mut total: u64 = 1;
        for &v in vars {
            self.check_var(v)?;
            total = total
                .checked_mul(self.cardinality(v) as u64)
                .ok_or_else(|| Error::InvalidArgument("configuration space overflows u64".into()))?;
        }
        let mut codes = vec![0u64; self.n];
        for &v in vars {
            let card = self.cardinality(v) as u64;
            for (code, &x) in codes.iter_mut().zip(&self.columns[v]) {
                *code = *code * card + x as u64;
            }
        }
        Ok((codes, total))
    }

    fn check_var(&self, v: usize) -> Result<()> {
        if v >= self.variables.len() {
            return Err(Error::InvalidArgument(format!(
                "variable index {v} out of range ({} variables)",
                self.variables.len()
            )));
        }
        Ok(())
    }

    /// Counts `child` levels per observed configuration of `parents`.
    pub fn family_counts(&self, child: usize, parents: &[usize]) -> Result<FamilyCounts> {
        self.check_var(child)?;
        let r = self.cardinality(child);
        let (codes, q) = self.config_codes(parents)?;
        let col = &self.columns[child];
        let configs = if q.saturating_mul(r as u64) <= DENSE_LIMIT {
            let mut dense = vec![0u64; q as usize * r];
            for (&code, &x) in codes.iter().zip(col) {
                dense[code as usize * r + x as usize] += 1;
            }
            dense
                .chunks(r)
                .enumerate()
                .filter(|(_, row)| row.iter().any(|&c| c > 0))
                .map(|(code, row)| (code as u64, row.to_vec()))
                .collect()
        } else {
            let mut sparse: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
            for (&code, &x) in codes.iter().zip(col) {
                sparse.entry(code).or_insert_with(|| vec![0; r])[x as usize] += 1;
            }
            sparse.into_iter().collect()
        };
        Ok(FamilyCounts { levels: r, parent_configs: q, configs })
    }
}

const DENSE_LIMIT: u64 = 1 << 22;

/// Child-level counts for each observed parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCounts {
    /// Number of child levels `r`.
    pub levels: usize,
    /// Number of declared parent configurations `q`.
    pub parent_configs: u64,
    /// `(configuration code, counts per child level)`, sorted by code.
    pub configs: Vec<(u64, Vec<u64>)>,
}

/// Counts `n_ijk` of two variables across the observed configurations of a
/// conditioning set.
///
/// Stored stratum-major: cell `(i, j, k)` lives at `k * R * C + i * C + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedTable {
    rows: usize,
    cols: usize,
    strata: usize,
    counts: Vec<u64>,
    n: u64,
}

impl StratifiedTable {
    pub fn new(rows: usize, cols: usize, strata: usize, counts: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 || strata == 0 {
            return Err(Error::InvalidArgument(
                "table dimensions must all be at least 1".into(),
            ));
        }
        if counts.len() != rows * cols * strata {
            return Err(Error::InvalidArgument(format!(
                "expected {} cells, got {}",
                rows * cols * strata,
                counts.len()
            )));
        }
        let n = counts.iter().sum();
        Ok(Self { rows, cols, strata, counts, n })
    }

    /// Builds a table from one row-major `R × C` slice per stratum.
    pub fn from_strata(rows: usize, cols: usize, strata: &[Vec<u64>]) -> Result<Self> {
        let counts: Vec<u64> = strata.iter().flatten().copied().collect();
        Self::new(rows, cols, strata.len(), counts)
    }

    /// Single-stratum table from nested rows.
    pub fn two_way(table: &[&[u64]]) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, |r| r.len());
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged two-way table".into()));
        }
        Self::new(rows, cols, 1, table.iter().flat_map(|r| r.iter().copied()).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn strata(&self) -> usize {
        self.strata
    }
    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize, k: usize) -> u64 {
        self.counts[k * self.rows * self.cols + i * self.cols + j]
    }

    /// `(R − 1)(C − 1)L`.
    pub fn df(&self) -> u64 {
        ((self.rows - 1) * (self.cols - 1) * self.strata) as u64
    }

    pub fn stratum_counts(&self, k: usize) -> &[u64] {
        let size = self.rows * self.cols;
        &self.counts[k * size..(k + 1) * size]
    }

    pub fn stratum(&self, k: usize) -> StratumView<'_> {
        StratumView::new(k, self.rows, self.cols, self.stratum_counts(k))
    }

    pub fn iter_strata(&self) -> impl Iterator<Item = StratumView<'_>> + '_ {
        (0..self.strata).map(move |k| self.stratum(k))
    }
}

/// One stratum of a [`StratifiedTable`] with its margins.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumView<'a> {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub counts: &'a [u64],
    /// `n_{i+k}`
    pub row_margins: Vec<u64>,
    /// `n_{+jk}`
    pub col_margins: Vec<u64>,
    /// `n_{++k}`
    pub total: u64,
}

impl<'a> StratumView<'a> {
    pub fn new(k: usize, rows: usize, cols: usize, counts: &'a [u64]) -> Self {
        debug_assert_eq!(counts.len(), rows * cols);
        let mut row_margins = vec![0u64; rows];
        let mut col_margins = vec![0u64; cols];
        for i in 0..rows {
            for j in 0..cols {
                let c = counts[i * cols + j];
                row_margins[i] += c;
                col_margins[j] += c;
            }
        }
        let total = row_margins.iter().sum();
        Self { k, rows, cols, counts, row_margins, col_margins, total }
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    /// `m_{ijk} = n_{i+k} n_{+jk} / n_{++k}`, zero for an empty stratum.
    #[inline]
    pub fn expected(&self, i: usize, j: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.row_margins[i] as f64 * self.col_margins[j] as f64 / self.total as f64
    }
}

/// Cross-tabulates `x` and `y` within each observed configuration of `z`.
///
/// Strata are ordered by the mixed-radix code of the `z` configuration, so the
/// result does not depend on row order. `R` and `C` come from the declared
/// level lists.
pub fn stratify(data: &DiscreteDataset, x: usize, y: usize, z: &[usize]) -> Result<StratifiedTable> {
    data.check_var(x)?;
    data.check_var(y)?;
    if x == y {
        return Err(Error::InvalidArgument("tested variables must differ".into()));
    }
    if z.contains(&x) || z.contains(&y) {
        return Err(Error::InvalidArgument(
            "conditioning set must not contain a tested variable".into(),
        ));
    }
    for (i, v) in z.iter().enumerate() {
        if z[..i].contains(v) {
            return Err(Error::InvalidArgument("conditioning set has duplicates".into()));
        }
    }
    let rows = data.cardinality(x);
    let cols = data.cardinality(y);
    let (codes, total) = data.config_codes(z)?;

    let strata_of_row: Vec<usize>;
    let strata;
    if total <= DENSE_LIMIT {
        let mut seen = vec![false; total as usize];
        for &c in &codes {
            seen[c as usize] = true;
        }
        let mut index = vec![usize::MAX; total as usize];
        let mut next = 0;
        for (code, s) in seen.iter().enumerate() {
            if *s {
                index[code] = next;
                next += 1;
            }
        }
        strata = next;
        strata_of_row = codes.iter().map(|&c| index[c as usize]).collect();
    } else {
        let mut distinct = codes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        strata = distinct.len();
        strata_of_row = codes
            .iter()
            .map(|c| distinct.binary_search(c).expect("code present"))
            .collect();
    }

    let size = rows * cols;
    let mut counts = vec![0u64; size * strata];
    let xs = data.column(x);
    let ys = data.column(y);
    for ((&k, &a), &b) in strata_of_row.iter().zip(xs).zip(ys) {
        counts[k * size + a as usize * cols + b as usize] += 1;
    }
    StratifiedTable::new(rows, cols, strata, counts)
}
