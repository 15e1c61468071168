use std::io::{Read, Write};
use std::path::Path;

use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::minkowski::{Rank2, MAX_DIM};

/// Potentials `A_mu(x)` sampled on every site of one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfiguration {
    lattice: Lattice,
    t: f64,
    /// `components[mu][site]`
    components: Vec<Vec<f64>>,
    periodic: bool,
}

impl FieldConfiguration {
    pub fn new(lattice: Lattice, t: f64, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != lattice.dim() {
            return Err(Error::LatticeMismatch(format!(
                "expected {} components, got {}",
                lattice.dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.len() != lattice.sites()) {
            return Err(Error::LatticeMismatch("component length differs from site count".into()));
        }
        if !t.is_finite() || components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field configuration"));
        }
        Ok(Self { lattice, t, components, periodic: true })
    }

    pub fn zeros(lattice: Lattice, t: f64) -> Self {
        Self {
            components: vec![vec![0.0; lattice.sites()]; lattice.dim()],
            lattice,
            t,
            periodic: true,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Whether the sampled data may be differenced across the periodic wrap.
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn set_periodic(&mut self, periodic: bool) {
        self.periodic = periodic;
    }

    pub fn component(&self, mu: usize) -> &[f64] {
        &self.components[mu]
    }

    pub fn component_mut(&mut self, mu: usize) -> &mut [f64] {
        &mut self.components[mu]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// All components at one site; trailing slots beyond the dimension are zero.
    #[inline]
    pub fn potential(&self, site: usize) -> [f64; MAX_DIM] {
        let mut a = [0.0; MAX_DIM];
        for (mu, c) in self.components.iter().enumerate() {
            a[mu] = c[site];
        }
        a
    }

    pub fn max_abs_diff(&self, other: &FieldConfiguration) -> f64 {
        self.components
            .iter()
            .flatten()
            .zip(other.components.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn require_periodic(&self) -> Result<()> {
        if self.periodic {
            Ok(())
        } else {
            Err(Error::NonPeriodicInput)
        }
    }

    pub fn csv_header(dim: usize) -> Vec<String> {
        (1..dim)
            .map(|i| format!("i{i}"))
            .chain((0..dim).map(|mu| format!("A_{mu}")))
            .collect()
    }

    /// Writes `i1,...,i(D-1),A_0,...,A_(D-1)` rows in lexicographic site order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::csv_header(self.lattice.dim()))?;
        let mut row = Vec::with_capacity(2 * self.lattice.dim());
        for site in 0..self.lattice.sites() {
            row.clear();
            let idx = self.lattice.multi_index(site);
            row.extend(idx[..self.lattice.spatial_dim()].iter().map(|i| i.to_string()));
            row.extend(self.components.iter().map(|c| format!("{:?}", c[site])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads the CSV layout written by [`FieldConfiguration::write_csv`].
    ///
    /// The header must match exactly and every site must appear once, in order.
    pub fn read_csv<R: Read>(input: R, lattice: Lattice, t: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let expected = Self::csv_header(lattice.dim());
        if header != expected {
            return Err(Error::Csv(format!(
                "header {:?} does not match expected {:?}",
                header, expected
            )));
        }
        let ns = lattice.spatial_dim();
        let mut components = vec![Vec::with_capacity(lattice.sites()); lattice.dim()];
        let mut count = 0usize;
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Csv(format!("row {} has {} fields", row + 1, rec.len())));
            }
            let idx: Vec<usize> = rec
                .iter()
                .take(ns)
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Csv(format!("row {}: bad site index: {e}", row + 1)))?;
            let site = lattice.site_index(&idx)?;
            if site != count {
                return Err(Error::Csv(format!(
                    "row {} is site {:?}; rows must be in lexicographic site order",
                    row + 1,
                    idx
                )));
            }
            for (mu, s) in rec.iter().skip(ns).enumerate() {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|e| Error::Csv(format!("row {}: bad value '{s}': {e}", row + 1)))?;
                components[mu].push(v);
            }
            count += 1;
        }
        if count != lattice.sites() {
            return Err(Error::Csv(format!("expected {} rows, got {count}", lattice.sites())));
        }
        Self::new(lattice, t, components)
    }

    pub fn load_csv(path: &Path, lattice: Lattice, t: f64) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f), lattice, t)
    }
}

/// Lattice field strength `F_ij = D_i A_j - D_j A_i` on every site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFieldStrength {
    lattice: Lattice,
    /// `pairs[p]` holds `F_ij` for the p-th pair `i < j` in lexicographic order.
    pairs: Vec<Vec<f64>>,
}

impl SpatialFieldStrength {
    fn pair_index(&self, i: usize, j: usize) -> usize {
        let ns = self.lattice.spatial_dim();
        // lexicographic rank of (i, j) with 1 <= i < j <= ns
        let (i0, j0) = (i - 1, j - 1);
        i0 * ns - i0 * (i0 + 1) / 2 + (j0 - i0 - 1)
    }

    /// `F_ij` at a site for spatial `i, j` (1-based).
    pub fn get(&self, i: usize, j: usize, site: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Less => self.pairs[self.pair_index(i, j)][site],
            Greater => -self.pairs[self.pair_index(j, i)][site],
        }
    }

    /// Spatial block as a `Rank2` with zero time row and column.
    pub fn at(&self, site: usize) -> Rank2 {
        let d = self.lattice.dim();
        let mut f = Rank2::zeros(d);
        for i in 1..d {
            for j in i + 1..d {
                let v = self.get(i, j, site);
                f[(i, j)] = v;
                f[(j, i)] = -v;
            }
        }
        f
    }

    /// `sum_{i<j} F_ij^2` per site.
    pub fn square_density(&self) -> Vec<f64> {
        let n = self.lattice.sites();
        (0..n)
            .map(|s| self.pairs.iter().map(|p| p[s] * p[s]).sum())
            .collect()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

pub fn spatial_field_strength(cfg: &FieldConfiguration) -> Result<SpatialFieldStrength> {
    cfg.require_periodic()?;
    let lat = *cfg.lattice();
    let d = lat.dim();
    let mut pairs = Vec::new();
    for i in 1..d {
        for j in i + 1..d {
            let di_aj = lat.central_diff(cfg.component(j), i);
            let dj_ai = lat.central_diff(cfg.component(i), j);
            pairs.push(di_aj.iter().zip(&dj_ai).map(|(a, b)| a - b).collect());
        }
    }
    Ok(SpatialFieldStrength { lattice: lat, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprs::ScalarExpr;
    use crate::fields::SpacetimeSolution;
    use std::f64::consts::PI;

    #[test]
    fn constant_configuration_has_zero_field() {
        let lat = Lattice::new(4, 6, 0.2).unwrap();
        let mut cfg = FieldConfiguration::zeros(lat, 0.0);
        cfg.component_mut(2).iter_mut().for_each(|v| *v = 1.7);
        let f = spatial_field_strength(&cfg).unwrap();
        assert!(f.square_density().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sinusoidal_field_converges_at_second_order() {
        let mut errs = Vec::new();
        for n in [16usize, 32, 64] {
            let lat = Lattice::new(3, n, 1.0 / n as f64).unwrap();
            let k = 2.0 * PI / lat.length();
            let mut pots = vec![ScalarExpr::zero(); 3];
            pots[2] = ScalarExpr::sin(&[0.0, k], 0.0);
            let cfg = SpacetimeSolution::new(pots).unwrap().sample(&lat, 0.0).unwrap();
            let f = spatial_field_strength(&cfg).unwrap();
            let err = (0..lat.sites())
                .map(|s| {
                    let x = lat.point(s, 0.0);
                    (f.get(1, 2, s) - k * (k * x[1]).cos()).abs()
                })
                .fold(0.0, f64::max);
            assert_eq!(f.get(2, 1, 3), -f.get(1, 2, 3));
            errs.push(err);
        }
        for w in errs.windows(2) {
            let p = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&p), "order {p}");
        }
    }

    #[test]
    fn linear_ramp_is_rejected() {
        let lat = Lattice::new(3, 8, 0.1).unwrap();
        let s = SpacetimeSolution::constant_magnetic(3, 0.5).unwrap();
        let cfg = s.sample(&lat, 0.0).unwrap();
        assert!(!cfg.is_periodic());
        assert!(matches!(spatial_field_strength(&cfg), Err(Error::NonPeriodicInput)));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let lat = Lattice::new(3, 4, 0.3).unwrap();
        let s = SpacetimeSolution::plane_wave(3, 0.1, &[1], lat.length()).unwrap();
        let cfg = s.sample(&lat, 0.2).unwrap();
        let mut buf = Vec::new();
        cfg.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i1,i2,A_0,A_1,A_2\n0,0,"));
        let back = FieldConfiguration::read_csv(&buf[..], lat, 0.2).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn csv_rejects_bad_order_and_header() {
        let lat = Lattice::new(2, 3, 0.5).unwrap();
        let good = "i1,A_0,A_1\n0,0,1\n1,0,2\n2,0,3\n";
        assert!(FieldConfiguration::read_csv(good.as_bytes(), lat, 0.0).is_ok());
        let swapped = "i1,A_0,A_1\n1,0,2\n0,0,1\n2,0,3\n";
        assert!(FieldConfiguration::read_csv(swapped.as_bytes(), lat, 0.0).is_err());
        let header = "x,A_0,A_1\n0,0,1\n1,0,2\n2,0,3\n";
        assert!(FieldConfiguration::read_csv(header.as_bytes(), lat, 0.0).is_err());
        let short = "i1,A_0,A_1\n0,0,1\n";
        assert!(FieldConfiguration::read_csv(short.as_bytes(), lat, 0.0).is_err());
    }
}
