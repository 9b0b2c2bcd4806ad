//! Country-year panel storage, CSV ingestion and design-matrix extraction.
//!
//! A [`Panel`] is long format: one row per `(country, year)` with a slot for
//! every registered variable. Missing cells are `None`. Everything downstream
//! works on a [`DesignMatrix`] or a [`Block`] pulled out of a panel under
//! listwise deletion.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies one observation of the panel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PanelKey {
    pub country: String,
    pub year: i32,
}

impl PanelKey {
    pub fn new(country: impl Into<String>, year: i32) -> Self {
        PanelKey {
            country: country.into(),
            year,
        }
    }
}

impl fmt::Display for PanelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.country, self.year)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Response,
    Regressor,
    RawComponent,
    Id,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub role: Role,
    pub unit: String,
    pub sign_flip: bool,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        VariableSpec {
            name: name.into(),
            role,
            unit: String::new(),
            sign_flip: false,
        }
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    pub fn with_sign_flip(mut self, flip: bool) -> Self {
        self.sign_flip = flip;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub key: PanelKey,
    /// One slot per registered variable, in registry order.
    pub values: Vec<Option<f64>>,
}

/// Names of the CSV columns holding the country and year identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdColumns {
    pub country: String,
    pub year: String,
}

impl Default for IdColumns {
    fn default() -> Self {
        IdColumns {
            country: "country".into(),
            year: "year".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    id_columns: IdColumns,
    variables: Vec<VariableSpec>,
    rows: Vec<PanelRow>,
    index: HashMap<String, usize>,
}

fn is_missing(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || cell == "NA"
}

impl Panel {
    /// Builds a panel from already-parsed rows, enforcing key uniqueness and
    /// slot completeness.
    pub fn from_rows(
        id_columns: IdColumns,
        variables: Vec<VariableSpec>,
        rows: Vec<PanelRow>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, spec) in variables.iter().enumerate() {
            if index.insert(spec.name.clone(), i).is_some() {
                return Err(Error::NameCollision(spec.name.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(rows.len());
        for row in &rows {
            if row.values.len() != variables.len() {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} values for {} variables",
                    row.key,
                    row.values.len(),
                    variables.len()
                )));
            }
            if !seen.insert(row.key.clone()) {
                return Err(Error::DuplicateKey(row.key.clone()));
            }
        }
        Ok(Panel {
            id_columns,
            variables,
            rows,
            index,
        })
    }

    pub fn id_columns(&self) -> &IdColumns {
        &self.id_columns
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable(&self, name: &str) -> Result<&VariableSpec> {
        Ok(&self.variables[self.variable_index(name)?])
    }

    pub fn value(&self, row: usize, name: &str) -> Result<Option<f64>> {
        let j = self.variable_index(name)?;
        Ok(self.rows[row].values[j])
    }

    pub fn missing_count(&self, name: &str) -> Result<usize> {
        let j = self.variable_index(name)?;
        Ok(self.rows.iter().filter(|r| r.values[j].is_none()).count())
    }

    /// Distinct countries in first-appearance order.
    pub fn countries(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.rows
            .iter()
            .filter(|r| seen.insert(r.key.country.as_str()))
            .map(|r| r.key.country.clone())
            .collect()
    }

    /// Distinct years, ascending.
    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.rows.iter().map(|r| r.key.year).collect();
        years.sort_unstable();
        years.dedup();
        years
    }

    /// Reads a long-format CSV. Columns of the file that are not in `schema`
    /// are ignored; a schema variable absent from the header is an error.
    pub fn load_csv<R: Read>(
        source: R,
        schema: &[VariableSpec],
        id_columns: &IdColumns,
    ) -> Result<Panel> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let header = reader.headers()?.clone();
        let position = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let country_col = position(&id_columns.country)?;
        let year_col = position(&id_columns.year)?;
        let var_cols = schema
            .iter()
            .map(|s| position(&s.name))
            .collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            // header is row 1
            let row_no = i + 2;
            let cell = |col: usize| record.get(col).unwrap_or("");

            let country = cell(country_col).to_string();
            if is_missing(&country) {
                return Err(Error::ParseError {
                    row: row_no,
                    column: id_columns.country.clone(),
                    message: "missing country identifier".into(),
                });
            }
            let year_text = cell(year_col);
            let year: i32 = year_text.trim().parse().map_err(|_| Error::ParseError {
                row: row_no,
                column: id_columns.year.clone(),
                message: format!("`{year_text}` is not an integer year"),
            })?;

            let values = schema
                .iter()
                .zip(&var_cols)
                .map(|(spec, &col)| {
                    let text = cell(col);
                    if is_missing(text) {
                        return Ok(None);
                    }
                    let v: f64 = text.trim().parse().map_err(|_| Error::ParseError {
                        row: row_no,
                        column: spec.name.clone(),
                        message: format!("`{text}` is not a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::ParseError {
                            row: row_no,
                            column: spec.name.clone(),
                            message: format!("`{text}` is not finite"),
                        });
                    }
                    Ok(Some(v))
                })
                .collect::<Result<Vec<_>>>()?;

            let key = PanelKey::new(country, year);
            if !seen.insert(key.clone()) {
                return Err(Error::DuplicateKey(key));
            }
            rows.push(PanelRow { key, values });
        }
        Panel::from_rows(id_columns.clone(), schema.to_vec(), rows)
    }

    /// Writes the panel in the same CSV dialect `load_csv` reads. Missing
    /// cells are written as `NA`; values use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        let mut header = vec![
            self.id_columns.country.clone(),
            self.id_columns.year.clone(),
        ];
        header.extend(self.variables.iter().map(|v| v.name.clone()));
        writer.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.key.country.clone(), row.key.year.to_string()];
            record.extend(row.values.iter().map(|v| match v {
                Some(x) => format!("{x:?}"),
                None => "NA".to_string(),
            }));
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io("<csv sink>", e))?;
        Ok(())
    }

    /// Returns a new panel with `spec` appended to the registry. Rows whose
    /// key is absent from `values` carry a missing cell.
    pub fn append_variable(
        &self,
        spec: VariableSpec,
        values: &HashMap<PanelKey, f64>,
    ) -> Result<Panel> {
        if self.index.contains_key(&spec.name) {
            return Err(Error::NameCollision(spec.name));
        }
        let mut next = self.clone();
        next.index.insert(spec.name.clone(), next.variables.len());
        next.variables.push(spec);
        for row in &mut next.rows {
            row.values.push(values.get(&row.key).copied());
        }
        Ok(next)
    }

    fn selection(&self, names: &[String]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(n.as_str()) {
                    return Err(Error::DuplicateVariable(n.clone()));
                }
                self.variable_index(n)
            })
            .collect()
    }

    /// Listwise extraction of a set of columns. Row order follows the panel.
    pub fn extract_block(&self, names: &[String]) -> Result<Block> {
        let cols = self.selection(names)?;
        let mut keys = Vec::new();
        let mut data = Vec::new();
        let mut dropped = 0;
        for row in &self.rows {
            let picked: Option<Vec<f64>> = cols.iter().map(|&j| row.values[j]).collect();
            match picked {
                Some(vals) => {
                    keys.push(row.key.clone());
                    data.extend(vals);
                }
                None => dropped += 1,
            }
        }
        if keys.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let values = DMatrix::from_row_slice(keys.len(), cols.len(), &data);
        Ok(Block {
            names: names.to_vec(),
            keys,
            values,
            dropped,
        })
    }

    /// Pulls the response and regressors out under listwise deletion.
    pub fn extract_design(
        &self,
        response: &str,
        regressors: &[String],
        policy: MissingPolicy,
    ) -> Result<DesignMatrix> {
        let MissingPolicy::Listwise = policy;
        if regressors.iter().any(|r| r == response) {
            return Err(Error::DuplicateVariable(response.to_string()));
        }
        let mut all = Vec::with_capacity(regressors.len() + 1);
        all.push(response.to_string());
        all.extend(regressors.iter().cloned());
        let block = self.extract_block(&all)?;
        let n = block.keys.len();
        let y = block.values.column(0).into_owned();
        let x = block.values.columns(1, regressors.len()).into_owned();
        debug_assert_eq!(x.nrows(), n);
        Ok(DesignMatrix {
            response: response.to_string(),
            y,
            x,
            names: regressors.to_vec(),
            keys: block.keys,
            dropped: block.dropped,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Listwise,
}

/// A set of named columns over the rows that survived listwise deletion.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub names: Vec<String>,
    pub keys: Vec<PanelKey>,
    pub values: DMatrix<f64>,
    pub dropped: usize,
}

impl Block {
    pub fn new(names: Vec<String>, keys: Vec<PanelKey>, values: DMatrix<f64>) -> Result<Self> {
        if names.len() != values.ncols() || keys.len() != values.nrows() {
            return Err(Error::InvalidArgument(format!(
                "block shape {}x{} does not match {} keys and {} names",
                values.nrows(),
                values.ncols(),
                keys.len(),
                names.len()
            )));
        }
        Ok(Block {
            names,
            keys,
            values,
            dropped: 0,
        })
    }

    /// Block without keys, for callers that only hold a matrix.
    pub fn unkeyed(names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let keys = (0..values.nrows())
            .map(|i| PanelKey::new("row", i as i32))
            .collect();
        Block::new(names, keys, values)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

/// Response vector and regressor matrix ready for estimation. The regressor
/// matrix never contains an intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub response: String,
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    pub keys: Vec<PanelKey>,
    pub dropped: usize,
}

impl DesignMatrix {
    pub fn new(
        response: impl Into<String>,
        y: DVector<f64>,
        x: DMatrix<f64>,
        names: Vec<String>,
        keys: Vec<PanelKey>,
    ) -> Result<Self> {
        if x.nrows() != y.len() || names.len() != x.ncols() || keys.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "design shape mismatch: y {}, X {}x{}, {} names, {} keys",
                y.len(),
                x.nrows(),
                x.ncols(),
                names.len(),
                keys.len()
            )));
        }
        Ok(DesignMatrix {
            response: response.into(),
            y,
            x,
            names,
            keys,
            dropped: 0,
        })
    }

    pub fn nrows(&self) -> usize {
        self.y.len()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn regressor_block(&self) -> Block {
        Block {
            names: self.names.clone(),
            keys: self.keys.clone(),
            values: self.x.clone(),
            dropped: self.dropped,
        }
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> DesignMatrix {
        let y = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.y[i]));
        let x = self.x.select_rows(indices);
        DesignMatrix {
            response: self.response.clone(),
            y,
            x,
            names: self.names.clone(),
            keys: indices.iter().map(|&i| self.keys[i].clone()).collect(),
            dropped: 0,
        }
    }
}

/// Location and scale used to z-score one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    /// Sample standard deviation (divisor n - 1).
    pub sd: f64,
    pub sign_flip: bool,
}

impl Standardization {
    /// Estimates mean and sample sd of `values`.
    pub fn fit(values: &[f64], sign_flip: bool) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                actual: values.len(),
            });
        }
        let (mean, sd) = mean_sd(values);
        if sd.is_nan() || sd <= 0.0 || sd <= f64::EPSILON * mean.abs() {
            return Err(Error::ZeroVariance(String::new()));
        }
        Ok(Standardization {
            mean,
            sd,
            sign_flip,
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        if self.sign_flip {
            -z
        } else {
            z
        }
    }

    pub fn invert(&self, z: f64) -> f64 {
        let z = if self.sign_flip { -z } else { z };
        z * self.sd + self.mean
    }
}

/// Two-pass mean and sample standard deviation.
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Z-scores `values` with the sample sd, negating afterwards when
/// `sign_flip` is set.
pub fn standardize(values: &[f64], sign_flip: bool) -> Result<(Vec<f64>, Standardization)> {
    let params = Standardization::fit(values, sign_flip)?;
    let z = values.iter().map(|&v| params.apply(v)).collect();
    Ok((z, params))
}

/// Standardizes a named column, attaching the name to a zero-variance error.
pub(crate) fn standardize_named(
    name: &str,
    values: &[f64],
    sign_flip: bool,
) -> Result<(Vec<f64>, Standardization)> {
    standardize(values, sign_flip).map_err(|e| match e {
        Error::ZeroVariance(_) => Error::ZeroVariance(name.to_string()),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(names: &[&str]) -> Vec<VariableSpec> {
        names
            .iter()
            .map(|n| VariableSpec::new(*n, Role::Regressor))
            .collect()
    }

    fn load(csv: &str, names: &[&str]) -> Result<Panel> {
        Panel::load_csv(csv.as_bytes(), &schema(names), &IdColumns::default())
    }

    #[test]
    fn loads_small_balanced_panel() {
        let csv = "country,year,GDP\nA,2000,1\nA,2001,2\nB,2000,3\nB,2001,4\n";
        let panel = load(csv, &["GDP"]).unwrap();
        assert_eq!(panel.len(), 4);
        assert_eq!(panel.missing_count("GDP").unwrap(), 0);
        assert_eq!(panel.countries(), vec!["A", "B"]);
        assert_eq!(panel.years(), vec![2000, 2001]);
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let csv = "country,year,GDP\nKEN,2015,1\nKEN,2015,2\n";
        match load(csv, &["GDP"]) {
            Err(Error::DuplicateKey(key)) => assert_eq!(key, PanelKey::new("KEN", 2015)),
            other => panic!("expected DuplicateKey, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        let csv = "country,year,CPI\nA,2000,1.5\nA,2001,abc\n";
        match load(csv, &["CPI"]) {
            Err(Error::ParseError { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "CPI");
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn missing_schema_column() {
        let csv = "country,year,GDP\nA,2000,1\n";
        assert!(matches!(load(csv, &["CPI"]), Err(Error::MissingColumn(c)) if c == "CPI"));
    }

    #[test]
    fn fractional_year_is_a_parse_error() {
        let csv = "country,year,GDP\nA,2000.5,1\n";
        assert!(matches!(
            load(csv, &["GDP"]),
            Err(Error::ParseError { column, .. }) if column == "year"
        ));
    }

    #[test]
    fn empty_and_na_are_missing() {
        let csv = "country,year,GDP,CPI\nA,2000,,1\nA,2001,NA,2\n";
        let panel = load(csv, &["GDP", "CPI"]).unwrap();
        assert_eq!(panel.missing_count("GDP").unwrap(), 2);
        assert_eq!(panel.missing_count("CPI").unwrap(), 0);
    }

    #[test]
    fn listwise_deletion_drops_rows_missing_the_response() {
        let csv = "country,year,y,x\nA,1,1,1\nA,2,NA,2\nA,3,3,3\nB,1,4,4\nB,2,5,5\n";
        let panel = load(csv, &["y", "x"]).unwrap();
        let d = panel
            .extract_design("y", &["x".to_string()], MissingPolicy::Listwise)
            .unwrap();
        assert_eq!(d.nrows(), 4);
        assert_eq!(d.dropped, 1);
        assert_eq!(
            d.keys,
            vec![
                PanelKey::new("A", 1),
                PanelKey::new("A", 3),
                PanelKey::new("B", 1),
                PanelKey::new("B", 2)
            ]
        );
        assert_eq!(d.y.as_slice(), &[1.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn intercept_only_design() {
        let csv = "country,year,y\nA,1,1\nA,2,2\n";
        let panel = load(csv, &["y"]).unwrap();
        let d = panel
            .extract_design("y", &[], MissingPolicy::Listwise)
            .unwrap();
        assert_eq!(d.ncols(), 0);
        assert_eq!(d.nrows(), 2);
    }

    #[test]
    fn extract_design_errors() {
        let csv = "country,year,y,x\nA,1,NA,1\nA,2,NA,2\n";
        let panel = load(csv, &["y", "x"]).unwrap();
        assert!(matches!(
            panel.extract_design("y", &["z".into()], MissingPolicy::Listwise),
            Err(Error::UnknownVariable(v)) if v == "z"
        ));
        assert!(matches!(
            panel.extract_design("y", &["x".into()], MissingPolicy::Listwise),
            Err(Error::EmptyDesign)
        ));
        assert!(matches!(
            panel.extract_design("y", &["y".into()], MissingPolicy::Listwise),
            Err(Error::DuplicateVariable(_))
        ));
    }

    #[test]
    fn standardize_examples() {
        let (z, p) = standardize(&[1.0, 2.0, 3.0], false).unwrap();
        assert_eq!(z, vec![-1.0, 0.0, 1.0]);
        assert_eq!(p.mean, 2.0);
        assert_eq!(p.sd, 1.0);
        let (z, _) = standardize(&[1.0, 2.0, 3.0], true).unwrap();
        assert_eq!(z, vec![1.0, -0.0, -1.0]);
        assert!(matches!(
            standardize(&[5.0, 5.0, 5.0], false),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            standardize(&[5.0], false),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn append_variable_contract() {
        let csv = "country,year,CPI\nA,1,1\nA,2,2\nB,1,3\n";
        let panel = load(csv, &["CPI"]).unwrap();
        let mut vals = HashMap::new();
        vals.insert(PanelKey::new("A", 1), 10.0);
        vals.insert(PanelKey::new("B", 1), 30.0);
        let next = panel
            .append_variable(VariableSpec::new("PC1", Role::Regressor), &vals)
            .unwrap();
        assert_eq!(next.variables().len(), 2);
        assert_eq!(next.missing_count("PC1").unwrap(), 1);
        assert_eq!(next.value(2, "PC1").unwrap(), Some(30.0));
        // original untouched
        assert_eq!(panel.variables().len(), 1);
        assert!(matches!(
            panel.append_variable(VariableSpec::new("CPI", Role::Regressor), &vals),
            Err(Error::NameCollision(n)) if n == "CPI"
        ));
    }
}
