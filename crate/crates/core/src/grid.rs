//! Position-density grids and their CSV / PGM / JSON writers.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schrodinger::{schrodinger_coefficients, schrodinger_wavefunction, SchrodingerState};
use crate::su2::{su2_coefficients, su2_wavefunction, SU2State};
use crate::C64;

/// Default samples per axis of [`default_grid`].
pub const DEFAULT_RESOLUTION: usize = 201;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let spec = Self { x_min, x_max, y_min, y_max, nx, ny };
        spec.validate()?;
        Ok(spec)
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [self.x_min, self.x_max, self.y_min, self.y_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.x_min >= self.x_max {
            return Err(Error::InvalidGrid(format!("x_min {} >= x_max {}", self.x_min, self.x_max)));
        }
        if self.y_min >= self.y_max {
            return Err(Error::InvalidGrid(format!("y_min {} >= y_max {}", self.y_min, self.y_max)));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points per axis, got {}x{}", self.nx, self.ny)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    /// Grid point closest to `(x, y)`, clamped to the grid.
    pub fn nearest_index(&self, x: f64, y: f64) -> (usize, usize) {
        let clamp = |v: f64, n: usize| v.round().clamp(0.0, (n - 1) as f64) as usize;
        (clamp((x - self.x_min) / self.dx(), self.nx), clamp((y - self.y_min) / self.dy(), self.ny))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// Parses `"xmin:xmax:nx,ymin:ymax:ny"`.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("expected xmin:xmax:nx,ymin:ymax:ny, got {s:?}"));
        let (xs, ys) = s.split_once(',').ok_or_else(bad)?;
        let axis = |part: &str| -> Result<(f64, f64, usize)> {
            let fields: Vec<&str> = part.trim().split(':').collect();
            if fields.len() != 3 {
                return Err(bad());
            }
            let lo = fields[0].trim().parse::<f64>().map_err(|_| bad())?;
            let hi = fields[1].trim().parse::<f64>().map_err(|_| bad())?;
            let n = fields[2].trim().parse::<usize>().map_err(|_| bad())?;
            Ok((lo, hi, n))
        };
        let (x_min, x_max, nx) = axis(xs)?;
        let (y_min, y_max, ny) = axis(ys)?;
        Self::new(x_min, x_max, y_min, y_max, nx, ny)
    }
}

/// Anything with a position-space amplitude that can be rendered.
pub trait DensitySource: Sync {
    fn amplitude(&self, x: f64, y: f64) -> Result<C64>;

    /// Largest x- and y-occupation in the expansion.
    fn max_modes(&self) -> (usize, usize);

    fn captured_norm(&self) -> f64;

    /// State parameters for metadata sidecars.
    fn describe(&self) -> serde_json::Value;

    /// Bound on the occupied Fock levels, `max(n, m) + 1`.
    fn energy_cap(&self) -> usize {
        let (n, m) = self.max_modes();
        n.max(m) + 1
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl DensitySource for SU2State {
    fn amplitude(&self, x: f64, y: f64) -> Result<C64> {
        su2_wavefunction(self, x, y)
    }

    fn max_modes(&self) -> (usize, usize) {
        SU2State::max_modes(self)
    }

    fn captured_norm(&self) -> f64 {
        su2_coefficients(self).captured_norm()
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": "su2",
            "nu": self.nu(),
            "alpha": pair(self.params().alpha()),
            "beta": pair(self.params().beta()),
            "p": self.ratio().p(),
            "q": self.ratio().q(),
        })
    }
}

impl DensitySource for SchrodingerState {
    fn amplitude(&self, x: f64, y: f64) -> Result<C64> {
        schrodinger_wavefunction(self, x, y)
    }

    fn max_modes(&self) -> (usize, usize) {
        SchrodingerState::max_modes(self)
    }

    fn captured_norm(&self) -> f64 {
        schrodinger_coefficients(self).captured_norm()
    }

    fn describe(&self) -> serde_json::Value {
        let s = self.summary();
        serde_json::json!({
            "family": "schrodinger",
            "psi": s.psi,
            "alpha": s.alpha,
            "beta": s.beta,
            "p": s.p,
            "q": s.q,
            "truncation": s.truncation,
            "expected_captured_norm": s.expected_captured_norm,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    spec: GridSpec,
    // row-major in y: values[j * nx + i] is the density at (x_i, y_j)
    values: Vec<f64>,
    mass: f64,
    peak_index: (usize, usize),
}

impl DensityGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Density at `(x_i, y_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    /// Row `j` (fixed `y_j`), ascending in x.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.spec.nx..(j + 1) * self.spec.nx]
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// First maximum scanning `i` (x) outermost, then `j`.
    pub fn peak_index(&self) -> (usize, usize) {
        self.peak_index
    }

    pub fn peak_position(&self) -> (f64, f64) {
        (self.spec.x(self.peak_index.0), self.spec.y(self.peak_index.1))
    }

    pub fn max_value(&self) -> f64 {
        let (i, j) = self.peak_index;
        self.value(i, j)
    }

    /// Trapezoid integral of the density times `weight(x, y)`.
    pub fn weighted_mass(&self, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let s = &self.spec;
        let end = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let mut total = 0.0;
        for j in 0..s.ny {
            let y = s.y(j);
            let mut row = 0.0;
            for i in 0..s.nx {
                row += end(i, s.nx) * self.value(i, j) * weight(s.x(i), y);
            }
            total += end(j, s.ny) * row;
        }
        total * s.dx() * s.dy()
    }

    /// Mass within `|x sinθ − y cosθ| ≤ half_width`, the band about the line
    /// through the origin at angle `θ`.
    pub fn band_mass(&self, theta: f64, half_width: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.weighted_mass(|x, y| if (x * s - y * c).abs() <= half_width { 1.0 } else { 0.0 })
    }

    /// `ny` lines ascending in y, `nx` comma-separated values ascending in x.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for j in 0..self.spec.ny {
            line.clear();
            for (i, v) in self.row(j).iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:.16e}"));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Factor mapping densities onto `0..=65535` in [`Self::write_pgm`].
    pub fn pgm_scale(&self) -> f64 {
        let max = self.max_value();
        if max > 0.0 {
            65535.0 / max
        } else {
            0.0
        }
    }

    /// Binary 16-bit PGM with the `y_max` row on top.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let scale = self.pgm_scale();
        write!(w, "P5\n{} {}\n65535\n", self.spec.nx, self.spec.ny)?;
        let mut bytes = Vec::with_capacity(2 * self.values.len());
        for j in (0..self.spec.ny).rev() {
            for v in self.row(j) {
                let level = (v * scale).round().clamp(0.0, 65535.0) as u16;
                bytes.extend_from_slice(&level.to_be_bytes());
            }
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn metadata<S: DensitySource + ?Sized>(&self, state: &S) -> GridMetadata {
        let (px, py) = self.peak_position();
        GridMetadata {
            grid: self.spec,
            state: state.describe(),
            captured_norm: state.captured_norm(),
            mass: self.mass,
            peak_index: self.peak_index,
            peak: (px, py),
            max_value: self.max_value(),
            pgm_scale: self.pgm_scale(),
        }
    }
}

/// JSON sidecar describing a rendered grid.
#[derive(Clone, Debug, Serialize)]
pub struct GridMetadata {
    pub grid: GridSpec,
    pub state: serde_json::Value,
    pub captured_norm: f64,
    pub mass: f64,
    pub peak_index: (usize, usize),
    pub peak: (f64, f64),
    pub max_value: f64,
    pub pgm_scale: f64,
}

/// Samples `|⟨x, y|state⟩|²` on `spec`. Rows are evaluated in parallel;
/// the result does not depend on the thread count.
pub fn render<S: DensitySource + ?Sized>(state: &S, spec: &GridSpec) -> Result<DensityGrid> {
    spec.validate()?;
    let rows: Vec<Vec<f64>> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            let y = spec.y(j);
            (0..spec.nx).map(|i| state.amplitude(spec.x(i), y).map(|a| a.norm_sqr())).collect()
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let mut peak_index = (0, 0);
    let mut best = f64::NEG_INFINITY;
    for i in 0..spec.nx {
        for j in 0..spec.ny {
            let v = values[j * spec.nx + i];
            if v > best {
                best = v;
                peak_index = (i, j);
            }
        }
    }
    let mut grid = DensityGrid { spec: *spec, values, mass: 0.0, peak_index };
    grid.mass = grid.weighted_mass(|_, _| 1.0);
    Ok(grid)
}

/// Square grid of half-width `1.2(√(2 E_cap) + 3)` at 201×201.
pub fn default_grid<S: DensitySource + ?Sized>(state: &S) -> GridSpec {
    let e_cap = state.energy_cap() as f64;
    let half = 1.2 * ((2.0 * e_cap).sqrt() + 3.0);
    GridSpec::symmetric(half, DEFAULT_RESOLUTION).expect("positive half-width")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::DEFAULT_TAIL_EPS;
    use crate::su2::{AnisotropyRatio, SU2Params};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vacuum() -> SU2State {
        SU2State::isotropic(0, SU2Params::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap())
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1.0, -1.0, 0.0, 1.0, 5, 5).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 0.0, 5, 5).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 1, 5).is_err());
        assert!(GridSpec::new(0.0, f64::NAN, 0.0, 1.0, 5, 5).is_err());
        let g = GridSpec::new(-1.0, 1.0, 0.0, 4.0, 3, 5).unwrap();
        assert_eq!((g.x(2), g.y(4), g.dy()), (1.0, 4.0, 1.0));
    }

    #[test]
    fn spec_parses() {
        let g: GridSpec = "-6:6:101,-5.5:5.5:51".parse().unwrap();
        assert_eq!(g, GridSpec::new(-6.0, 6.0, -5.5, 5.5, 101, 51).unwrap());
        assert!("1:2:3".parse::<GridSpec>().is_err());
        assert!("2:1:3,0:1:3".parse::<GridSpec>().is_err());
        assert!("a:1:3,0:1:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn vacuum_grid() {
        let spec = GridSpec::symmetric(6.0, 101).unwrap();
        let g = render(&vacuum(), &spec).unwrap();
        assert_eq!(g.peak_index(), (50, 50));
        assert!((g.mass() - 1.0).abs() < 1e-6);
        assert!((g.max_value() - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn default_grid_half_widths() {
        let g = default_grid(&vacuum());
        assert!((g.x_max - 1.2 * (2f64.sqrt() + 3.0)).abs() < 1e-14);
        assert_eq!((g.nx, g.ny), (201, 201));

        let params = SU2Params::new(c(3f64.sqrt() / 2.0, 0.0), c(0.5, 0.0)).unwrap();
        let s = SU2State::isotropic(40, params);
        let g = default_grid(&s);
        assert!(g.x_max > (82f64).sqrt());
        assert!(render(&s, &g).unwrap().mass() > 1.0 - 1e-4);

        let fig2 = SU2Params::new(c(0.0, 3f64.sqrt() / 2.0), c(0.5, 0.0)).unwrap();
        let sch = SchrodingerState::with_tail_rule(c(8.0, 0.0), fig2, AnisotropyRatio::ISOTROPIC, DEFAULT_TAIL_EPS)
            .unwrap();
        let g = default_grid(&sch);
        let r = 8.0 * 2f64.sqrt();
        assert!(g.contains(r, r) && g.contains(-r, -r));
    }

    #[test]
    fn peak_tie_break_prefers_lowest_x_index() {
        // |1,0⟩ has two equal lobes at x = ±1.
        let p = SU2Params::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let s = SU2State::isotropic(1, p);
        let g = render(&s, &GridSpec::symmetric(2.0, 17).unwrap()).unwrap();
        // ψ₁(x)² is even in x: lobes at ±1, first one found is x = −1.
        assert_eq!(g.value(4, 8), g.value(12, 8));
        assert_eq!(g.peak_index(), (4, 8));
    }

    #[test]
    fn writers() {
        let spec = GridSpec::new(-1.0, 1.0, -2.0, 2.0, 3, 2).unwrap();
        let g = render(&vacuum(), &spec).unwrap();
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: Vec<f64> = lines[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), 3);
        assert_eq!(first[1], g.value(1, 0));

        let mut pgm = Vec::new();
        g.write_pgm(&mut pgm).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 12);
        // Both rows are equal by symmetry; centre pixel is the maximum.
        assert_eq!(&pgm[header.len() + 2..header.len() + 4], &[0xff, 0xff]);

        let meta = serde_json::to_value(g.metadata(&vacuum())).unwrap();
        assert_eq!(meta["grid"]["nx"], 3);
        assert_eq!(meta["state"]["nu"], 0);
    }

    #[test]
    fn band_mass_of_vacuum() {
        let g = render(&vacuum(), &GridSpec::symmetric(7.0, 141).unwrap()).unwrap();
        // Gaussian with variance ½ per axis: P(|ξ| ≤ w) = erf(w); the band edge
        // cuts through cells, so agreement is only to O(dx).
        let want = libm::erf(1.0);
        let got = g.band_mass(0.3, 1.0);
        assert!((got - want).abs() < 2e-3, "{got} vs {want}");
    }
}
