//! Plane primitives: points, vectors, lexicographic order, piecewise-linear
//! trajectories and the earliest time two moving agents come within a given
//! radius of each other.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Event-time tolerance.
pub const TIME_TOL: f64 = 1e-9;
/// Position-coincidence tolerance.
pub const POSITION_TOL: f64 = 1e-6;
/// Allowed deviation of a moving segment's speed from 1.
pub const SPEED_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("time {t} is outside the trajectory span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
    #[error("trajectories do not overlap in time after {t_from}")]
    NoOverlap { t_from: f64 },
    #[error("segment is not contiguous with the trajectory end")]
    Discontinuous,
    #[error("segment speed {speed} is neither 0 nor 1")]
    IllegalSpeed { speed: f64 },
}

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// A displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub dx: f64,
    pub dy: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point) -> f64 {
        (*self - other).norm()
    }

    /// Position vector of this point relative to `origin`.
    pub fn relative_to(&self, origin: Point) -> Vec2 {
        *self - origin
    }

    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        lex_cmp_pair((self.x, self.y), (other.x, other.y))
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { dx: 0.0, dy: 0.0 };

    pub const fn new(dx: f64, dy: f64) -> Self {
        Vec2 { dx, dy }
    }

    /// Unit vector at `angle` radians clockwise from North (the +y axis).
    pub fn from_bearing(angle: f64) -> Self {
        Vec2::new(angle.sin(), angle.cos())
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite()
    }

    pub fn dot(&self, other: Vec2) -> f64 {
        self.dx * other.dx + self.dy * other.dy
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(*self)
    }

    pub fn norm(&self) -> f64 {
        self.dx.hypot(self.dy)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(&self) -> Option<Vec2> {
        let n = self.norm();
        if n <= f64::EPSILON {
            None
        } else {
            Some(Vec2::new(self.dx / n, self.dy / n))
        }
    }

    pub fn lex_cmp(&self, other: &Vec2) -> Ordering {
        lex_cmp_pair((self.dx, self.dy), (other.dx, other.dy))
    }

    /// The point reached from the origin by this vector.
    pub fn to_point(self) -> Point {
        Point::new(self.dx, self.dy)
    }
}

fn lex_cmp_pair(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// Strict lexicographic order on `(x, y)`: `p` precedes `q`.
///
/// This is the order behind "larger agent" and "largest vector". It only
/// depends on coordinate differences, so agents with private frames that
/// share a compass agree on it.
pub fn lex_less(p: Point, q: Point) -> bool {
    p.lex_cmp(&q) == Ordering::Less
}

/// Largest element of an iterator of vectors under the lexicographic order.
pub fn lex_max_vec<I: IntoIterator<Item = Vec2>>(vectors: I) -> Option<Vec2> {
    vectors.into_iter().max_by(|a, b| a.lex_cmp(b))
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dx, self.dy)
    }
}

impl Sub for Point {
    type Output = Vec2;
    fn sub(self, rhs: Point) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add<Vec2> for Point {
    type Output = Point;
    fn add(self, rhs: Vec2) -> Point {
        Point::new(self.x + rhs.dx, self.y + rhs.dy)
    }
}

impl Sub<Vec2> for Point {
    type Output = Point;
    fn sub(self, rhs: Vec2) -> Point {
        Point::new(self.x - rhs.dx, self.y - rhs.dy)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.dx += rhs.dx;
        self.dy += rhs.dy;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.dx, -self.dy)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.dx * s, self.dy * s)
    }
}

/// One linear piece of a trajectory. Speed is either 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_time: f64,
    pub end_time: f64,
    pub start_point: Point,
    pub end_point: Point,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end_time - self.start_time
    }

    pub fn length(&self) -> f64 {
        self.start_point.dist(self.end_point)
    }

    pub fn is_waiting(&self) -> bool {
        self.length() <= SPEED_TOL * self.duration().max(1.0)
    }

    /// Checks the speed rule: stationary, or unit speed within [`SPEED_TOL`].
    pub fn check_speed(&self) -> Result<(), GeometryError> {
        let len = self.length();
        let dur = self.duration();
        if self.is_waiting() {
            return Ok(());
        }
        if dur <= 0.0 {
            return Err(GeometryError::IllegalSpeed {
                speed: f64::INFINITY,
            });
        }
        let speed = len / dur;
        if (len - dur).abs() <= SPEED_TOL * dur.max(1.0) {
            Ok(())
        } else {
            Err(GeometryError::IllegalSpeed { speed })
        }
    }

    pub fn velocity(&self) -> Vec2 {
        let dur = self.duration();
        if dur <= 0.0 {
            Vec2::ZERO
        } else {
            (self.end_point - self.start_point) * (1.0 / dur)
        }
    }

    /// Linear interpolation; `t` is clamped into the segment.
    pub fn position_at(&self, t: f64) -> Point {
        let dur = self.duration();
        if dur <= 0.0 || t <= self.start_time {
            return self.start_point;
        }
        if t >= self.end_time {
            return self.end_point;
        }
        let f = (t - self.start_time) / dur;
        self.start_point + (self.end_point - self.start_point) * f
    }
}

/// Piecewise-linear path of one agent, contiguous in time and space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub origin_time: f64,
    pub origin_point: Point,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn new(origin_time: f64, origin_point: Point) -> Self {
        Trajectory {
            origin_time,
            origin_point,
            segments: Vec::new(),
        }
    }

    pub fn end_time(&self) -> f64 {
        self.segments
            .last()
            .map_or(self.origin_time, |s| s.end_time)
    }

    pub fn end_point(&self) -> Point {
        self.segments
            .last()
            .map_or(self.origin_point, |s| s.end_point)
    }

    /// Appends a segment that must start where and when the trajectory ends.
    pub fn push(&mut self, seg: Segment) -> Result<(), GeometryError> {
        if (seg.start_time - self.end_time()).abs() > TIME_TOL
            || seg.start_point.dist(self.end_point()) > POSITION_TOL
            || seg.end_time < seg.start_time
        {
            return Err(GeometryError::Discontinuous);
        }
        seg.check_speed()?;
        self.segments.push(seg);
        Ok(())
    }

    /// Appends a unit-speed move to `to`.
    pub fn move_to(&mut self, to: Point) -> &mut Self {
        let start_time = self.end_time();
        let start_point = self.end_point();
        self.segments.push(Segment {
            start_time,
            end_time: start_time + start_point.dist(to),
            start_point,
            end_point: to,
        });
        self
    }

    /// Appends a stationary stretch of the given duration.
    pub fn wait(&mut self, duration: f64) -> &mut Self {
        let start_time = self.end_time();
        let p = self.end_point();
        self.segments.push(Segment {
            start_time,
            end_time: start_time + duration,
            start_point: p,
            end_point: p,
        });
        self
    }

    pub fn position_at(&self, t: f64) -> Result<Point, GeometryError> {
        let end = self.end_time();
        if t < self.origin_time - TIME_TOL || t > end + TIME_TOL {
            return Err(GeometryError::OutOfSpan {
                t,
                start: self.origin_time,
                end,
            });
        }
        if self.segments.is_empty() {
            return Ok(self.origin_point);
        }
        let idx = self
            .segments
            .partition_point(|s| s.end_time < t)
            .min(self.segments.len() - 1);
        Ok(self.segments[idx].position_at(t))
    }

    /// Every breakpoint: the origin followed by each segment end.
    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, Point)> + '_ {
        std::iter::once((self.origin_time, self.origin_point))
            .chain(self.segments.iter().map(|s| (s.end_time, s.end_point)))
    }
}

/// Smallest `s` in `[0, max_dt]` with `|rel + vel * s| <= radius`.
///
/// Relative motion is linear, so the squared distance is a quadratic in `s`.
/// Roots come from the cancellation-free pairing `q/a`, `c/q`; a root just past
/// `max_dt` (within [`TIME_TOL`]) is snapped back onto it.
pub fn linear_first_entry(rel: Vec2, vel: Vec2, radius: f64, max_dt: f64) -> Option<f64> {
    let c = rel.norm_sq() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let a = vel.norm_sq();
    if a <= f64::EPSILON * f64::EPSILON {
        return None;
    }
    let b = 2.0 * rel.dot(vel);
    if b >= 0.0 {
        // not closing in
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = 0.5 * (-b + disc.sqrt());
    let entry = c / q;
    if entry <= max_dt {
        Some(entry.max(0.0))
    } else if entry <= max_dt + TIME_TOL {
        Some(max_dt)
    } else {
        None
    }
}

/// Earliest `t >= t_from` at which the two trajectories are within `eps`.
///
/// Returns `Ok(None)` when they never get that close before either ends.
pub fn earliest_approach(
    a: &Trajectory,
    b: &Trajectory,
    eps: f64,
    t_from: f64,
) -> Result<Option<f64>, GeometryError> {
    let start = t_from.max(a.origin_time).max(b.origin_time);
    let end = a.end_time().min(b.end_time());
    if start > end + TIME_TOL {
        return Err(GeometryError::NoOverlap { t_from });
    }
    let mut cuts: Vec<f64> = a
        .breakpoints()
        .chain(b.breakpoints())
        .map(|(t, _)| t)
        .filter(|&t| t > start && t < end)
        .collect();
    cuts.push(start);
    cuts.push(end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= TIME_TOL);

    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let dt = t1 - t0;
        let r0 = a.position_at(t0)? - b.position_at(t0)?;
        let r1 = a.position_at(t1)? - b.position_at(t1)?;
        let vel = if dt > 0.0 {
            (r1 - r0) * (1.0 / dt)
        } else {
            Vec2::ZERO
        };
        if let Some(s) = linear_first_entry(r0, vel, eps, dt) {
            return Ok(Some(t0 + s));
        }
    }
    if cuts.len() == 1 {
        // zero-length overlap
        let r = a.position_at(start)? - b.position_at(start)?;
        if r.norm() <= eps {
            return Ok(Some(start));
        }
    }
    Ok(None)
}
