/// 2×3 affine matrix in SVG order: `x' = a·x + c·y + e`, `y' = b·x + d·y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for TransformMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl TransformMatrix {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0, e: 0.0, f: 0.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self { a, b, c, d, e, f }
    }

    pub fn translate(tx: f64, ty: f64) -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0, tx, ty)
    }

    pub fn scale(sx: f64, sy: f64) -> Self {
        Self::new(sx, 0.0, 0.0, sy, 0.0, 0.0)
    }

    pub fn rotate(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Self::new(c, s, -s, c, 0.0, 0.0)
    }

    pub fn skew_x(deg: f64) -> Self {
        Self::new(1.0, 0.0, deg.to_radians().tan(), 1.0, 0.0, 0.0)
    }

    pub fn skew_y(deg: f64) -> Self {
        Self::new(1.0, deg.to_radians().tan(), 0.0, 1.0, 0.0, 0.0)
    }

    /// `self × other`: applies `other` first, then `self`.
    pub fn then_apply_to(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.c * other.b,
            b: self.b * other.a + self.d * other.b,
            c: self.a * other.c + self.c * other.d,
            d: self.b * other.c + self.d * other.d,
            e: self.a * other.e + self.c * other.f + self.e,
            f: self.b * other.e + self.d * other.f + self.f,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a * x + self.c * y + self.e, self.b * x + self.d * y + self.f)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// No rotation or skew component, so horizontal and vertical lines stay
    /// horizontal and vertical.
    pub fn is_axis_aligned(&self) -> bool {
        self.b == 0.0 && self.c == 0.0
    }

    /// Geometric-mean scale factor `sqrt(|det|)`.
    pub fn mean_scale(&self) -> f64 {
        self.determinant().abs().sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
            self.e - other.e,
            self.f - other.f,
        ]
        .iter()
        .all(|d| d.abs() <= tol)
    }
}

impl std::ops::Mul for TransformMatrix {
    type Output = TransformMatrix;

    fn mul(self, rhs: Self) -> Self {
        self.then_apply_to(&rhs)
    }
}

/// Parses an SVG `transform` attribute into a single matrix. The functions
/// compose left to right, so the rightmost applies first.
pub fn parse_transform_list(s: &str) -> Option<TransformMatrix> {
    let mut m = TransformMatrix::IDENTITY;
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.find('(')?;
        let close = rest.find(')')?;
        if close < open {
            return None;
        }
        let name = rest[..open].trim().trim_start_matches(',').trim();
        let args: Vec<f64> = rest[open + 1..close]
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()?;
        let t = match (name, args.as_slice()) {
            ("matrix", &[a, b, c, d, e, f]) => TransformMatrix::new(a, b, c, d, e, f),
            ("translate", &[tx]) => TransformMatrix::translate(tx, 0.0),
            ("translate", &[tx, ty]) => TransformMatrix::translate(tx, ty),
            ("scale", &[s]) => TransformMatrix::scale(s, s),
            ("scale", &[sx, sy]) => TransformMatrix::scale(sx, sy),
            ("rotate", &[a]) => TransformMatrix::rotate(a),
            ("rotate", &[a, cx, cy]) => {
                TransformMatrix::translate(cx, cy) * TransformMatrix::rotate(a) * TransformMatrix::translate(-cx, -cy)
            }
            ("skewX", &[a]) => TransformMatrix::skew_x(a),
            ("skewY", &[a]) => TransformMatrix::skew_y(a),
            _ => return None,
        };
        m = m * t;
        rest = rest[close + 1..].trim_start().trim_start_matches(',').trim_start();
    }
    Some(m)
}
