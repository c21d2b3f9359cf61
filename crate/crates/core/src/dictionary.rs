//! Candidate dictionaries, observations and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, sq_dist};
use crate::simplex::SimplexWeights;

/// `M` candidate vectors in `R^n`, stored candidate-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    n: usize,
    m: usize,
    data: Vec<f64>,
    sq_norms: Vec<f64>,
    l2_bound: f64,
}

impl Dictionary {
    pub fn from_candidates(candidates: Vec<Vec<f64>>) -> Result<Self> {
        let m = candidates.len();
        let n = candidates.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for c in &candidates {
            check_len("candidate length", n, c.len())?;
            data.extend_from_slice(c);
        }
        Self::from_candidate_major(n, m, data)
    }

    /// `data[j * n + i]` is the value of candidate `j` at design point `i`.
    pub fn from_candidate_major(n: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Data(format!("empty dictionary (n={n}, M={m})")));
        }
        check_len("dictionary storage", n * m, data.len())?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dictionary"));
        }
        let sq_norms: Vec<f64> = data.chunks_exact(n).map(|c| dot(c, c)).collect();
        let l2_bound = sq_norms.iter().copied().fold(0.0, f64::max).sqrt();
        Ok(Self {
            n,
            m,
            data,
            sq_norms,
            l2_bound,
        })
    }

    /// Number of design points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of candidates.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn candidate(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn candidates(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n)
    }

    /// `L = max_j ||f_j||_2`.
    pub fn l2_bound(&self) -> f64 {
        self.l2_bound
    }

    pub fn sq_norm(&self, j: usize) -> f64 {
        self.sq_norms[j]
    }

    /// `f_λ = Σ λ_j f_j`.
    pub fn mix(&self, lambda: &SimplexWeights) -> Result<Vec<f64>> {
        self.combine(lambda.as_slice())
    }

    /// `Σ c_j f_j` for arbitrary coefficients.
    pub fn combine(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len("weights", self.m, coeffs.len())?;
        let mut out = vec![0.0; self.n];
        for (c, f) in coeffs.iter().zip(self.candidates()) {
            if *c != 0.0 {
                for (o, x) in out.iter_mut().zip(f) {
                    *o += c * x;
                }
            }
        }
        Ok(out)
    }

    /// `||f_j - v||²` for every candidate.
    pub fn sq_distances(&self, v: &[f64]) -> Vec<f64> {
        self.candidates().map(|f| sq_dist(f, v)).collect()
    }

    /// The same candidates evaluated only at the given design points.
    pub fn restrict_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.m);
        for f in self.candidates() {
            data.extend(rows.iter().map(|&i| f[i]));
        }
        Self::from_candidate_major(rows.len(), self.m, data)
    }

    pub fn gram(&self) -> Gram {
        Gram::new(self)
    }
}

/// Symmetric matrix of candidate inner products `G_ij = <f_i, f_j>`.
#[derive(Debug, Clone)]
pub struct Gram {
    m: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(dict: &Dictionary) -> Self {
        let m = dict.m();
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            let fi = dict.candidate(i);
            data[i * m + i] = dict.sq_norm(i);
            for j in (i + 1)..m {
                let g = dot(fi, dict.candidate(j));
                data[i * m + j] = g;
                data[j * m + i] = g;
            }
        }
        Self { m, data }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }
}

/// Observed responses `Y`, plus the noiseless truth `η` when simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    y: Vec<f64>,
    truth: Option<Vec<f64>>,
}

impl Observation {
    pub fn new(y: Vec<f64>, truth: Option<Vec<f64>>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Data("empty observation".into()));
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("observations"));
        }
        if let Some(t) = &truth {
            check_len("truth", y.len(), t.len())?;
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("truth"));
            }
        }
        Ok(Self { y, truth })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn truth(&self) -> Option<&[f64]> {
        self.truth.as_deref()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn restrict_rows(&self, rows: &[usize]) -> Result<Self> {
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::new(pick(&self.y), self.truth.as_deref().map(pick))
    }
}

/// Reads the tabular layout: a header, then one row per design point with
/// columns `y[,truth],f1,...,fM`.
pub fn read_csv<R: Read>(reader: R) -> Result<(Dictionary, Observation)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("y") {
        return Err(Error::Data("first column must be named 'y'".into()));
    }
    let has_truth = headers.get(1) == Some("truth");
    let first_candidate = if has_truth { 2 } else { 1 };
    let m = headers.len().saturating_sub(first_candidate);
    if m == 0 {
        return Err(Error::Data("no candidate columns".into()));
    }

    let mut y = Vec::new();
    let mut truth = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {}: cannot parse '{s}'", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        y.push(values[0]);
        if has_truth {
            truth.push(values[1]);
        }
        rows.push(values[first_candidate..].to_vec());
    }
    let n = y.len();
    let mut data = vec![0.0; n * m];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            data[j * n + i] = v;
        }
    }
    let dict = Dictionary::from_candidate_major(n, m, data)?;
    let obs = Observation::new(y, has_truth.then_some(truth))?;
    Ok((dict, obs))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<(Dictionary, Observation)> {
    read_csv(std::fs::File::open(path)?)
}

/// Writes the layout accepted by [`read_csv`], with shortest round-trip
/// decimals.
pub fn write_csv<W: Write>(writer: W, dict: &Dictionary, obs: &Observation) -> Result<()> {
    check_len("observation", dict.n(), obs.n())?;
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["y".to_string()];
    if obs.truth().is_some() {
        header.push("truth".into());
    }
    header.extend((1..=dict.m()).map(|j| format!("f{j}")));
    wtr.write_record(&header)?;
    for i in 0..dict.n() {
        let mut row = vec![fmt_f64(obs.y()[i])];
        if let Some(t) = obs.truth() {
            row.push(fmt_f64(t[i]));
        }
        row.extend(dict.candidates().map(|f| fmt_f64(f[i])));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> Dictionary {
        Dictionary::from_candidates(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn l2_bound_is_max_norm() {
        let d = three();
        assert_eq!(d.l2_bound(), 2f64.sqrt());
        let recomputed = d.candidates().map(|f| dot(f, f).sqrt()).fold(0.0, f64::max);
        assert_eq!(d.l2_bound(), recomputed);
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(Dictionary::from_candidates(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Dictionary::from_candidates(vec![vec![f64::INFINITY]]).is_err());
        assert!(Dictionary::from_candidates(vec![]).is_err());
        assert!(Observation::new(vec![1.0], Some(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn gram_matches_direct_products() {
        let d = three();
        let g = d.gram();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j), dot(d.candidate(i), d.candidate(j)));
            }
        }
    }

    #[test]
    fn restrict_rows_selects_coordinates() {
        let d = three();
        let r = d.restrict_rows(&[1]).unwrap();
        assert_eq!(r.n(), 1);
        assert_eq!(r.candidate(2), &[1.0]);
        let o = Observation::new(vec![3.0, 4.0], Some(vec![5.0, 6.0])).unwrap();
        let ro = o.restrict_rows(&[1]).unwrap();
        assert_eq!(ro.y(), &[4.0]);
        assert_eq!(ro.truth(), Some(&[6.0][..]));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = Dictionary::from_candidates(vec![vec![0.1, 1e-300], vec![-2.5e17, 1.0 / 3.0]]).unwrap();
        let o = Observation::new(vec![0.7, -0.0], Some(vec![std::f64::consts::PI, 2.0])).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &d, &o).unwrap();
        let (d2, o2) = read_csv(&buf[..]).unwrap();
        assert_eq!(d, d2);
        assert_eq!(o, o2);
    }

    #[test]
    fn csv_without_truth_column() {
        let text = "y,f1,f2\n0.5,1,0\n0.5,0,1\n";
        let (d, o) = read_csv(text.as_bytes()).unwrap();
        assert_eq!((d.n(), d.m()), (2, 2));
        assert!(o.truth().is_none());
        assert_eq!(d.candidate(1), &[0.0, 1.0]);
    }

    #[test]
    fn csv_errors() {
        assert!(read_csv("x,f1\n1,2\n".as_bytes()).is_err());
        assert!(read_csv("y\n1\n".as_bytes()).is_err());
        assert!(read_csv("y,f1\n1,abc\n".as_bytes()).is_err());
        assert!(read_csv("y,f1\n".as_bytes()).is_err());
    }
}
