//! Profile and fractal statistics of 2D fields: circle and disc averages,
//! thick-point sets, and box-counting dimension estimates.

use rayon::prelude::*;

use crate::error::{GffError, Result};
use crate::green::functional_variance;
use crate::lattice::{FieldFunction, WeightedGraph};
use crate::sampler::FieldSample;
use crate::stats::{fit_line, LineFit};

/// A field laid out on a rectangular grid with unit spacing, row-major.
#[derive(Debug, Clone)]
pub struct GridField {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(GffError::InvalidInput(
                "grid fields need at least 2 x 2 vertices for interpolation".into(),
            ));
        }
        if values.len() != rows * cols {
            return Err(GffError::InvalidInput(format!(
                "{} values for a {rows} x {cols} grid",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// View a sample on a square grid (row-major values; both the
    /// square-grid sampler and 2D box lattices use this layout) as a grid
    /// field.
    pub fn from_square_sample(side: usize, sample: &FieldSample) -> Result<Self> {
        Self::new(side, side, sample.values.clone())
    }

    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    /// Bilinear interpolation at fractional grid coordinates.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let r0 = x.floor().max(0.0) as usize;
        let c0 = y.floor().max(0.0) as usize;
        let r0 = r0.min(self.rows - 2);
        let c0 = c0.min(self.cols - 2);
        let fx = x - r0 as f64;
        let fy = y - c0 as f64;
        let v00 = self.value(r0, c0);
        let v01 = self.value(r0, c0 + 1);
        let v10 = self.value(r0 + 1, c0);
        let v11 = self.value(r0 + 1, c0 + 1);
        v00 * (1.0 - fx) * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v10 * fx * (1.0 - fy)
            + v11 * fx * fy
    }

    /// Half-width of the largest centered circle family; the reference
    /// radius `R0` behind the `r = R0 e^{-t}` convention.
    pub fn reference_radius(&self) -> f64 {
        ((self.rows.min(self.cols) - 1) / 2) as f64
    }
}

/// Number of equispaced angles used for a circle of the given radius.
fn angle_count(radius: f64) -> usize {
    64.max((8.0 * radius).ceil() as usize)
}

fn check_circle(rows: usize, cols: usize, center: (f64, f64), radius: f64) -> Result<()> {
    if radius < 2.0 {
        return Err(GffError::InvalidInput(format!(
            "radius {radius} below the 2-spacing lattice cutoff"
        )));
    }
    let (cx, cy) = center;
    if cx - radius < 0.0
        || cy - radius < 0.0
        || cx + radius > (rows - 1) as f64
        || cy + radius > (cols - 1) as f64
    {
        return Err(GffError::InvalidInput(format!(
            "circle of radius {radius} at ({cx}, {cy}) exits the {rows} x {cols} domain"
        )));
    }
    Ok(())
}

/// Mean of the field over a circle: bilinear interpolation at equispaced
/// angles.
pub fn circle_average(field: &GridField, center: (f64, f64), radius: f64) -> Result<f64> {
    check_circle(field.rows, field.cols, center, radius)?;
    let n = angle_count(radius);
    let mut acc = 0.0;
    for i in 0..n {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        acc += field.bilinear(
            center.0 + radius * theta.cos(),
            center.1 + radius * theta.sin(),
        );
    }
    Ok(acc / n as f64)
}

/// The exact linear functional computed by [`circle_average`]: bilinear
/// weights at every sampled angle, accumulated per grid vertex and
/// normalized. `rho^T field` reproduces the circle average.
pub fn circle_functional(
    rows: usize,
    cols: usize,
    center: (f64, f64),
    radius: f64,
) -> Result<Vec<f64>> {
    check_circle(rows, cols, center, radius)?;
    let n = angle_count(radius);
    let mut rho = vec![0.0f64; rows * cols];
    let scale = 1.0 / n as f64;
    for i in 0..n {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let x = center.0 + radius * theta.cos();
        let y = center.1 + radius * theta.sin();
        let r0 = (x.floor().max(0.0) as usize).min(rows - 2);
        let c0 = (y.floor().max(0.0) as usize).min(cols - 2);
        let fx = x - r0 as f64;
        let fy = y - c0 as f64;
        rho[r0 * cols + c0] += scale * (1.0 - fx) * (1.0 - fy);
        rho[r0 * cols + c0 + 1] += scale * (1.0 - fx) * fy;
        rho[(r0 + 1) * cols + c0] += scale * fx * (1.0 - fy);
        rho[(r0 + 1) * cols + c0 + 1] += scale * fx * fy;
    }
    Ok(rho)
}

/// Circle and disc averages along a log-radius grid around one center.
#[derive(Debug, Clone)]
pub struct AverageProfile {
    pub center: (usize, usize),
    pub t_grid: Vec<f64>,
    /// Radii `R0 e^{-t}`, strictly decreasing.
    pub radii: Vec<f64>,
    pub circle_means: Vec<f64>,
    pub disc_means: Vec<f64>,
}

/// Exponentially-weighted average of circle means:
/// `A(t) = integral_t^{s_max} B(s) e^{t-s} ds` with the weights renormalized
/// over the truncated range. The integral is truncated at the lattice cutoff
/// `s_max = ln(R0 / 2)` (radii below two spacings are dropped) and evaluated
/// by trapezoidal quadrature on a step-0.15 s-grid.
pub fn disc_average_profile(
    field: &GridField,
    center: (usize, usize),
    t_grid: &[f64],
) -> Result<AverageProfile> {
    if t_grid.is_empty() {
        return Err(GffError::InvalidInput("empty t grid".into()));
    }
    for pair in t_grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(GffError::InvalidInput(
                "t grid must be strictly increasing".into(),
            ));
        }
    }
    let r0 = field.reference_radius();
    let s_max = (r0 / 2.0).ln();
    if *t_grid.last().unwrap() >= s_max {
        return Err(GffError::InvalidInput(format!(
            "t grid reaches past the lattice cutoff s_max = {s_max:.4}"
        )));
    }
    let c = (center.0 as f64, center.1 as f64);
    let mut circle_means = Vec::with_capacity(t_grid.len());
    let mut disc_means = Vec::with_capacity(t_grid.len());
    let mut radii = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        radii.push(r0 * (-t).exp());
        circle_means.push(circle_average(field, c, r0 * (-t).exp())?);
        disc_means.push(disc_average(field, c, t, s_max)?);
    }
    Ok(AverageProfile {
        center,
        t_grid: t_grid.to_vec(),
        radii,
        circle_means,
        disc_means,
    })
}

const S_STEP: f64 = 0.15;

fn s_nodes(t: f64, s_max: f64) -> Vec<f64> {
    let mut nodes = Vec::new();
    let mut s = t;
    while s < s_max - 1e-12 {
        nodes.push(s);
        s += S_STEP;
    }
    nodes.push(s_max);
    nodes
}

fn disc_average(field: &GridField, center: (f64, f64), t: f64, s_max: f64) -> Result<f64> {
    let r0 = field.reference_radius();
    let nodes = s_nodes(t, s_max);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut prev: Option<(f64, f64, f64)> = None; // (s, weight, B)
    for &s in &nodes {
        let w = (t - s).exp();
        let b = circle_average(field, center, r0 * (-s).exp())?;
        if let Some((s0, w0, b0)) = prev {
            let h = s - s0;
            num += 0.5 * h * (w0 * b0 + w * b);
            den += 0.5 * h * (w0 + w);
        }
        prev = Some((s, w, b));
    }
    if den == 0.0 {
        return Err(GffError::InvalidInput(
            "degenerate disc-average window".into(),
        ));
    }
    Ok(num / den)
}

/// Disc-average field `A_x(t)` over every eligible grid point (those whose
/// largest averaging circle stays inside the domain), `NaN` elsewhere.
/// Rows are processed in parallel; the output does not depend on the thread
/// count.
pub fn disc_average_field(field: &GridField, t: f64) -> Result<Vec<f64>> {
    let r0 = field.reference_radius();
    let s_max = (r0 / 2.0).ln();
    if t >= s_max {
        return Err(GffError::InvalidInput(format!(
            "t = {t} is past the lattice cutoff s_max = {s_max:.4}"
        )));
    }
    let r_max = r0 * (-t).exp();
    let nodes = s_nodes(t, s_max);
    // precompute radii, weights and trapezoid coefficients
    let radii: Vec<f64> = nodes.iter().map(|&s| r0 * (-s).exp()).collect();
    let weights: Vec<f64> = nodes.iter().map(|&s| (t - s).exp()).collect();
    let mut coeff = vec![0.0f64; nodes.len()];
    let mut den = 0.0;
    for i in 0..nodes.len() - 1 {
        let h = nodes[i + 1] - nodes[i];
        coeff[i] += 0.5 * h * weights[i];
        coeff[i + 1] += 0.5 * h * weights[i + 1];
        den += 0.5 * h * (weights[i] + weights[i + 1]);
    }
    for c in coeff.iter_mut() {
        *c /= den;
    }

    let rows = field.rows;
    let cols = field.cols;
    let mut out = vec![f64::NAN; rows * cols];
    out.par_chunks_mut(cols).enumerate().for_each(|(r, row)| {
        let rf = r as f64;
        for (c, slot) in row.iter_mut().enumerate() {
            let cf = c as f64;
            let margin = rf
                .min(cf)
                .min((rows - 1) as f64 - rf)
                .min((cols - 1) as f64 - cf);
            if margin < r_max {
                continue;
            }
            let mut acc = 0.0;
            for (k, &radius) in radii.iter().enumerate() {
                let n = angle_count(radius);
                let mut circ = 0.0;
                for i in 0..n {
                    let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    circ += field.bilinear(rf + radius * theta.cos(), cf + radius * theta.sin());
                }
                acc += coeff[k] * circ / n as f64;
            }
            *slot = acc;
        }
    });
    Ok(out)
}

/// Thick points at level `a`: grid points where `A_x(t) / (sigma t)` reaches
/// `sqrt(a)`. `sigma` is the variance-growth normalization (standard
/// deviation of `B_x` per unit `sqrt(t)`), estimated exactly via
/// [`estimate_profile_sigma`].
pub fn thick_points(field: &GridField, a: f64, t: f64, sigma: f64) -> Result<Vec<(usize, usize)>> {
    if !(0.0..=2.0).contains(&a) {
        return Err(GffError::InvalidInput(
            "thickness level must lie in [0, 2]".into(),
        ));
    }
    if !(sigma > 0.0) || !(t > 0.0) {
        return Err(GffError::InvalidInput("need positive t and sigma".into()));
    }
    let disc = disc_average_field(field, t)?;
    let threshold = a.sqrt() * sigma * t;
    let mut points = Vec::new();
    for r in 0..field.rows {
        for c in 0..field.cols {
            let v = disc[r * field.cols + c];
            if v.is_nan() {
                continue;
            }
            if v >= threshold {
                points.push((r, c));
            }
        }
    }
    Ok(points)
}

/// Count of eligible points for a thick-point scan at depth `t`.
pub fn eligible_count(field: &GridField, t: f64) -> Result<usize> {
    let disc = disc_average_field(field, t)?;
    Ok(disc.iter().filter(|v| !v.is_nan()).count())
}

/// Exact variance-growth normalization: linear-fit slope of
/// `Var B_center(t) = rho_t^T G rho_t` against `t`, computed per radius by
/// sparse solve. Returns `sigma = sqrt(slope)`.
pub fn estimate_profile_sigma(
    g: &WeightedGraph,
    rows: usize,
    cols: usize,
    center: (f64, f64),
    t_values: &[f64],
) -> Result<f64> {
    if t_values.len() < 2 {
        return Err(GffError::InvalidInput("need at least two t values".into()));
    }
    if rows * cols != g.n_vertices() {
        return Err(GffError::InvalidInput(
            "grid does not match the graph".into(),
        ));
    }
    let r0 = ((rows.min(cols) - 1) / 2) as f64;
    let mut vars = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let rho = circle_functional(rows, cols, center, r0 * (-t).exp())?;
        vars.push(functional_variance(g, &FieldFunction::new(rho))?);
    }
    let fit = fit_line(t_values, &vars);
    if !(fit.slope > 0.0) {
        return Err(GffError::Numerical(format!(
            "variance slope {:.3e} is not positive",
            fit.slope
        )));
    }
    Ok(fit.slope.sqrt())
}

/// One prepared field for thick-point scans: the sample, its disc-average
/// field at the scan depth, and the exact normalization. Preparing is the
/// expensive step; thresholding at different levels reuses it.
#[derive(Debug, Clone)]
pub struct ThickAnalysis {
    pub side: usize,
    pub seed: u64,
    /// Scan depth; radii run from `R0 e^{-t}` down to the 2-spacing cutoff.
    pub t: f64,
    /// Exact variance-growth normalization from `rho^T G rho` fits.
    pub sigma: f64,
    pub field: GridField,
    disc: Vec<f64>,
    pub eligible: usize,
}

/// Default box-counting scales: divisors of 513 so the full-grid and line
/// controls come out exact.
pub const THICK_SCALES: [usize; 4] = [1, 3, 9, 27];

impl ThickAnalysis {
    /// Sample a zero-boundary field on a `side x side` grid and compute the
    /// disc-average field at depth `t = ln(R0 / 4)` (largest averaging
    /// radius four spacings) together with the exact normalization.
    pub fn prepare(side: usize, seed: u64) -> Result<Self> {
        if side < 65 || side % 2 == 0 {
            return Err(GffError::InvalidInput(
                "thick-point scans need an odd side of at least 65".into(),
            ));
        }
        let sample = crate::sampler::sample_square_zero_boundary(side, seed)?;
        let field = GridField::from_square_sample(side, &sample)?;
        let r0 = field.reference_radius();
        let t = (r0 / 4.0).ln();
        let n = ((side - 1) / 2) as i64;
        let g = crate::lattice::build_box_lattice_capped(
            2,
            n,
            1.0,
            usize::MAX,
            crate::lattice::Validation::SkipDefiniteness,
        )?;
        let center = (n as f64, n as f64);
        // fit the variance growth over a mid-range of depths
        let t_values: Vec<f64> = (0..4).map(|i| 0.4 * t + 0.15 * t * i as f64).collect();
        let sigma = estimate_profile_sigma(&g, side, side, center, &t_values)?;
        let disc = disc_average_field(&field, t)?;
        let eligible = disc.iter().filter(|v| !v.is_nan()).count();
        Ok(Self {
            side,
            seed,
            t,
            sigma,
            field,
            disc,
            eligible,
        })
    }

    /// Thick points at level `a` from the prepared disc field.
    pub fn points(&self, a: f64) -> Result<Vec<(usize, usize)>> {
        if !(0.0..=2.0).contains(&a) {
            return Err(GffError::InvalidInput(
                "thickness level must lie in [0, 2]".into(),
            ));
        }
        let threshold = a.sqrt() * self.sigma * self.t;
        let mut points = Vec::new();
        for r in 0..self.side {
            for c in 0..self.side {
                let v = self.disc[r * self.side + c];
                if !v.is_nan() && v >= threshold {
                    points.push((r, c));
                }
            }
        }
        Ok(points)
    }

    pub fn dimension(&self, a: f64, scales: &[usize]) -> Result<BoxDimension> {
        box_dimension(&self.points(a)?, scales)
    }
}

/// Box-counting dimension estimate with fit diagnostics.
#[derive(Debug, Clone)]
pub struct BoxDimension {
    pub estimate: f64,
    pub fit: LineFit,
    /// (box size, occupied boxes) per scale.
    pub counts: Vec<(usize, usize)>,
}

/// Least-squares slope of `log(occupied boxes)` against `log(1/box size)`.
pub fn box_dimension(points: &[(usize, usize)], scales: &[usize]) -> Result<BoxDimension> {
    if points.is_empty() {
        return Err(GffError::InvalidInput(
            "empty point set: box dimension undefined".into(),
        ));
    }
    if scales.len() < 2 || scales.iter().any(|&s| s == 0) {
        return Err(GffError::InvalidInput(
            "need at least two positive scales".into(),
        ));
    }
    let mut counts = Vec::with_capacity(scales.len());
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &s in scales {
        let mut boxes: Vec<(usize, usize)> = points.iter().map(|&(r, c)| (r / s, c / s)).collect();
        boxes.sort_unstable();
        boxes.dedup();
        counts.push((s, boxes.len()));
        xs.push(-(s as f64).ln());
        ys.push((boxes.len() as f64).ln());
    }
    let fit = fit_line(&xs, &ys);
    Ok(BoxDimension {
        estimate: fit.slope,
        fit: fit.clone(),
        counts,
    })
}
