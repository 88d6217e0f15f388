//! Oriented-rectangle overlap via the separating-axis test.

/// An oriented rectangle: center, half extents and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub cx: f64,
    pub cy: f64,
    pub half_length: f64,
    pub half_width: f64,
    pub heading: f64,
}

impl OrientedRect {
    pub fn new(cx: f64, cy: f64, half_length: f64, half_width: f64, heading: f64) -> Self {
        Self {
            cx,
            cy,
            half_length,
            half_width,
            heading,
        }
    }

    fn axes(&self) -> [(f64, f64); 2] {
        let (s, c) = self.heading.sin_cos();
        [(c, s), (-s, c)]
    }

    /// Half extent of the projection onto a unit axis.
    fn projected_radius(&self, axis: (f64, f64)) -> f64 {
        let [u, v] = self.axes();
        self.half_length * (axis.0 * u.0 + axis.1 * u.1).abs()
            + self.half_width * (axis.0 * v.0 + axis.1 * v.1).abs()
    }

    /// The four corners, counterclockwise.
    pub fn corners(&self) -> [(f64, f64); 4] {
        let [u, v] = self.axes();
        let (hl, hw) = (self.half_length, self.half_width);
        let c = (self.cx, self.cy);
        [
            (c.0 + hl * u.0 + hw * v.0, c.1 + hl * u.1 + hw * v.1),
            (c.0 - hl * u.0 + hw * v.0, c.1 - hl * u.1 + hw * v.1),
            (c.0 - hl * u.0 - hw * v.0, c.1 - hl * u.1 - hw * v.1),
            (c.0 + hl * u.0 - hw * v.0, c.1 + hl * u.1 - hw * v.1),
        ]
    }

    /// Point containment in the rectangle's local frame.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [u, v] = self.axes();
        let dx = x - self.cx;
        let dy = y - self.cy;
        (dx * u.0 + dy * u.1).abs() <= self.half_length
            && (dx * v.0 + dy * v.1).abs() <= self.half_width
    }
}

/// Separating-axis test for two oriented rectangles: they overlap iff
/// no axis drawn from either rectangle's edge normals separates the
/// projected extents. Touching boundaries count as overlap.
pub fn rects_overlap(a: &OrientedRect, b: &OrientedRect) -> bool {
    let dx = b.cx - a.cx;
    let dy = b.cy - a.cy;
    for axis in a.axes().into_iter().chain(b.axes()) {
        let dist = (dx * axis.0 + dy * axis.1).abs();
        if dist > a.projected_radius(axis) + b.projected_radius(axis) {
            return false;
        }
    }
    true
}
