//! Squares, unions of squares and their overlap with grid cells.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GEOM_TOL: f64 = 1e-12;
/// Sub-cell resolution used when a cell meets a rotated square boundary.
const SUBSAMPLES: usize = 16;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(other.x0),
            x1: self.x1.min(other.x1),
            y0: self.y0.max(other.y0),
            y1: self.y1.min(other.y1),
        };
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 - GEOM_TOL
            && other.x1 <= self.x1 + GEOM_TOL
            && other.y0 >= self.y0 - GEOM_TOL
            && other.y1 <= self.y1 + GEOM_TOL
    }
}

/// A square with given center, side length and rotation (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub center: (f64, f64),
    pub side: f64,
    #[serde(default)]
    pub rotation: f64,
}

impl Square {
    pub fn new(center: (f64, f64), side: f64, rotation: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::domain(format!(
                "square side must be positive, got {side}"
            )));
        }
        if !(center.0.is_finite() && center.1.is_finite() && rotation.is_finite()) {
            return Err(Error::domain("square has non-finite center or rotation"));
        }
        Ok(Self {
            center,
            side,
            rotation,
        })
    }

    /// Axis-aligned unit square centred at `(cx, cy)`.
    pub fn unit(cx: f64, cy: f64) -> Self {
        Self {
            center: (cx, cy),
            side: 1.0,
            rotation: 0.0,
        }
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Rotation by a multiple of π/2 leaves the point set axis-aligned.
    pub fn is_axis_aligned(&self) -> bool {
        let r = self.rotation.rem_euclid(FRAC_PI_2);
        r < 1e-12 || FRAC_PI_2 - r < 1e-12
    }

    /// Map local frame coordinates `(u, v)` (axes along the sides) to the plane.
    pub fn to_world(&self, u: f64, v: f64) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        (self.center.0 + c * u - s * v, self.center.1 + s * u + c * v)
    }

    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Closed-set membership with a small tolerance.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = 0.5 * self.side + 1e-12;
        if self.is_axis_aligned() {
            return (x - self.center.0).abs() <= h && (y - self.center.1).abs() <= h;
        }
        let (u, v) = self.to_local(x, y);
        u.abs() <= h && v.abs() <= h
    }

    fn contains_open(&self, x: f64, y: f64) -> bool {
        let h = 0.5 * self.side;
        let (u, v) = self.to_local(x, y);
        u.abs() < h && v.abs() < h
    }

    pub fn vertices(&self) -> [(f64, f64); 4] {
        let h = 0.5 * self.side;
        [
            self.to_world(-h, -h),
            self.to_world(h, -h),
            self.to_world(h, h),
            self.to_world(-h, h),
        ]
    }

    pub fn bbox(&self) -> Rect {
        if self.is_axis_aligned() {
            let h = 0.5 * self.side;
            return Rect {
                x0: self.center.0 - h,
                x1: self.center.0 + h,
                y0: self.center.1 - h,
                y1: self.center.1 + h,
            };
        }
        let v = self.vertices();
        let xs = v.iter().map(|p| p.0);
        let ys = v.iter().map(|p| p.1);
        Rect {
            x0: xs.clone().fold(f64::INFINITY, f64::min),
            x1: xs.fold(f64::NEG_INFINITY, f64::max),
            y0: ys.clone().fold(f64::INFINITY, f64::min),
            y1: ys.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn contains_rect(&self, r: &Rect) -> bool {
        if self.is_axis_aligned() {
            return self.bbox().contains_rect(r);
        }
        [(r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)]
            .iter()
            .all(|&(x, y)| self.contains(x, y))
    }
}

/// Finite union of squares of arbitrary size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    squares: Vec<Square>,
}

impl Region {
    pub fn new(squares: Vec<Square>) -> Result<Self> {
        if squares.is_empty() {
            return Err(Error::domain("a region needs at least one square"));
        }
        for s in &squares {
            Square::new(s.center, s.side, s.rotation)?;
        }
        Ok(Self { squares })
    }

    pub fn single(square: Square) -> Self {
        Self {
            squares: vec![square],
        }
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn bbox(&self) -> Rect {
        self.squares
            .iter()
            .map(Square::bbox)
            .reduce(|a, b| Rect {
                x0: a.x0.min(b.x0),
                x1: a.x1.max(b.x1),
                y0: a.y0.min(b.y0),
                y1: a.y1.max(b.y1),
            })
            .expect("region is nonempty")
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.squares.iter().any(|s| s.contains(x, y))
    }

    /// Area of the union, exact when every square is axis-aligned.
    pub fn area(&self) -> f64 {
        if self.squares.iter().all(Square::is_axis_aligned) {
            let rects: Vec<Rect> = self.squares.iter().map(Square::bbox).collect();
            return union_area(&rects);
        }
        let bbox = self.bbox();
        let n = 2000;
        let (hx, hy) = (
            (bbox.x1 - bbox.x0) / n as f64,
            (bbox.y1 - bbox.y0) / n as f64,
        );
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (
                    bbox.x0 + (i as f64 + 0.5) * hx,
                    bbox.y0 + (j as f64 + 0.5) * hy,
                );
                if self.contains(x, y) {
                    count += 1;
                }
            }
        }
        count as f64 * hx * hy
    }

    /// `‖Σ_Q 1_Q‖_∞`, the maximal number of squares covering one point.
    pub fn max_multiplicity(&self) -> usize {
        let probes: Vec<(f64, f64)> = if self.squares.iter().all(Square::is_axis_aligned) {
            let rects: Vec<Rect> = self.squares.iter().map(Square::bbox).collect();
            let xs = breakpoints(rects.iter().flat_map(|r| [r.x0, r.x1]));
            let ys = breakpoints(rects.iter().flat_map(|r| [r.y0, r.y1]));
            let mids = |v: &[f64]| {
                v.windows(2)
                    .map(|w| 0.5 * (w[0] + w[1]))
                    .collect::<Vec<_>>()
            };
            let (mx, my) = (mids(&xs), mids(&ys));
            mx.iter()
                .flat_map(|&x| my.iter().map(move |&y| (x, y)))
                .collect()
        } else {
            let bbox = self.bbox();
            let n = 400;
            let (hx, hy) = (
                (bbox.x1 - bbox.x0) / n as f64,
                (bbox.y1 - bbox.y0) / n as f64,
            );
            (0..n)
                .flat_map(|i| {
                    (0..n).map(move |j| {
                        (
                            bbox.x0 + (i as f64 + 0.5) * hx,
                            bbox.y0 + (j as f64 + 0.5) * hy,
                        )
                    })
                })
                .chain(self.squares.iter().map(|s| s.center))
                .collect()
        };
        probes
            .iter()
            .map(|&(x, y)| {
                self.squares
                    .iter()
                    .filter(|s| s.contains_open(x, y))
                    .count()
            })
            .max()
            .unwrap_or(0)
    }
}

/// A finite family of distinct unit squares; the vertex set of the stability graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareCover {
    squares: Vec<Square>,
}

impl SquareCover {
    pub fn new(squares: Vec<Square>) -> Result<Self> {
        if squares.is_empty() {
            return Err(Error::domain("a cover needs at least one square"));
        }
        for (i, s) in squares.iter().enumerate() {
            Square::new(s.center, s.side, s.rotation)?;
            if (s.side - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "square {i} has side {} but covers must consist of unit squares",
                    s.side
                )));
            }
            for (j, t) in squares[..i].iter().enumerate() {
                if same_square(s, t) {
                    return Err(Error::domain(format!("squares {j} and {i} are identical")));
                }
            }
        }
        Ok(Self { squares })
    }

    /// `nx × ny` axis-aligned unit squares with the given center spacing,
    /// centred on `center`.
    pub fn grid(center: (f64, f64), nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        let ox = center.0 - 0.5 * spacing * (nx as f64 - 1.0);
        let oy = center.1 - 0.5 * spacing * (ny as f64 - 1.0);
        let mut squares = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                squares.push(Square::unit(
                    ox + spacing * i as f64,
                    oy + spacing * j as f64,
                ));
            }
        }
        Self::new(squares)
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn region(&self) -> Region {
        Region {
            squares: self.squares.clone(),
        }
    }
}

fn same_square(a: &Square, b: &Square) -> bool {
    if (a.center.0 - b.center.0).abs() > GEOM_TOL || (a.center.1 - b.center.1).abs() > GEOM_TOL {
        return false;
    }
    if a.is_axis_aligned() && b.is_axis_aligned() {
        return true;
    }
    let d = (a.rotation - b.rotation).rem_euclid(FRAC_PI_2);
    d < GEOM_TOL || FRAC_PI_2 - d < GEOM_TOL
}

fn breakpoints(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < GEOM_TOL);
    v
}

/// Exact area of a union of axis-aligned rectangles by coordinate compression.
pub fn union_area(rects: &[Rect]) -> f64 {
    let xs = breakpoints(rects.iter().flat_map(|r| [r.x0, r.x1]));
    let ys = breakpoints(rects.iter().flat_map(|r| [r.y0, r.y1]));
    let mut area = 0.0;
    for wx in xs.windows(2) {
        let xm = 0.5 * (wx[0] + wx[1]);
        for wy in ys.windows(2) {
            let ym = 0.5 * (wy[0] + wy[1]);
            if rects
                .iter()
                .any(|r| r.x0 < xm && xm < r.x1 && r.y0 < ym && ym < r.y1)
            {
                area += (wx[1] - wx[0]) * (wy[1] - wy[0]);
            }
        }
    }
    area
}

/// A set whose overlap with grid cells is needed for integration.
#[derive(Debug, Clone, Copy)]
pub enum Shape<'a> {
    Union(&'a [Square]),
    Intersection(&'a Square, &'a Square),
}

impl Shape<'_> {
    pub fn bbox(&self) -> Option<Rect> {
        match self {
            Shape::Union(sq) => sq.iter().map(Square::bbox).reduce(|a, b| Rect {
                x0: a.x0.min(b.x0),
                x1: a.x1.max(b.x1),
                y0: a.y0.min(b.y0),
                y1: a.y1.max(b.y1),
            }),
            Shape::Intersection(a, b) => a.bbox().intersect(&b.bbox()),
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Union(sq) => sq.iter().any(|s| s.contains_open(x, y)),
            Shape::Intersection(a, b) => a.contains_open(x, y) && b.contains_open(x, y),
        }
    }

    /// Fraction of `cell` covered by the shape.
    pub fn cell_fraction(&self, cell: &Rect) -> f64 {
        let cell_area = cell.area();
        let covered = match self {
            Shape::Union(squares) => {
                if squares.iter().any(|s| s.contains_rect(cell)) {
                    return 1.0;
                }
                let touching: Vec<&Square> = squares
                    .iter()
                    .filter(|s| s.bbox().intersect(cell).is_some())
                    .collect();
                if touching.is_empty() {
                    return 0.0;
                }
                if touching.iter().all(|s| s.is_axis_aligned()) {
                    let clipped: Vec<Rect> = touching
                        .iter()
                        .filter_map(|s| s.bbox().intersect(cell))
                        .collect();
                    union_area(&clipped)
                } else {
                    return self.subsampled_fraction(cell);
                }
            }
            Shape::Intersection(a, b) => {
                if a.is_axis_aligned() && b.is_axis_aligned() {
                    match a
                        .bbox()
                        .intersect(&b.bbox())
                        .and_then(|r| r.intersect(cell))
                    {
                        Some(r) => r.area(),
                        None => return 0.0,
                    }
                } else {
                    if a.contains_rect(cell) && b.contains_rect(cell) {
                        return 1.0;
                    }
                    return self.subsampled_fraction(cell);
                }
            }
        };
        (covered / cell_area).clamp(0.0, 1.0)
    }

    fn subsampled_fraction(&self, cell: &Rect) -> f64 {
        let hx = (cell.x1 - cell.x0) / SUBSAMPLES as f64;
        let hy = (cell.y1 - cell.y0) / SUBSAMPLES as f64;
        let mut hits = 0usize;
        for i in 0..SUBSAMPLES {
            for j in 0..SUBSAMPLES {
                let x = cell.x0 + (i as f64 + 0.5) * hx;
                let y = cell.y0 + (j as f64 + 0.5) * hy;
                if self.contains(x, y) {
                    hits += 1;
                }
            }
        }
        hits as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
    }
}
