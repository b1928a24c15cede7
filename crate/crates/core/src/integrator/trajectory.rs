use std::io::{self, Write};

use crate::{Error, Result, Scalar};

/// Per-node annotations, exported in the `regime_flags` CSV column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeFlags {
    pub history: bool,
    pub breakpoint: bool,
    pub clamped: bool,
}

impl NodeFlags {
    /// `|`-separated names of the set flags, empty when none are set.
    pub fn label(&self) -> String {
        [
            (self.history, "history"),
            (self.breakpoint, "breakpoint"),
            (self.clamped, "clamped"),
        ]
        .iter()
        .filter(|(set, _)| *set)
        .map(|(_, name)| *name)
        .collect::<Vec<_>>()
        .join("|")
    }
}

/// Dense solution record, history included.
///
/// Each node stores the derivative from the right (used on the interval that starts at the
/// node) and from the left (used on the interval that ends there); they differ only at
/// breakpoints where `a(t - tau)` switches or where the history meets the solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub(crate) times: Vec<T>,
    pub(crate) values: Vec<T>,
    pub(crate) derivatives: Vec<T>,
    pub(crate) left_derivatives: Vec<T>,
    pub(crate) dc: Vec<bool>,
    pub(crate) flags: Vec<NodeFlags>,
    pub(crate) breakpoints: Vec<T>,
    pub(crate) clamp_negative: bool,
}

impl<T: Scalar> Trajectory<T> {
    pub(crate) fn with_capacity(n: usize, clamp_negative: bool) -> Self {
        Self {
            times: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            derivatives: Vec::with_capacity(n),
            left_derivatives: Vec::with_capacity(n),
            dc: Vec::with_capacity(n),
            flags: Vec::with_capacity(n),
            breakpoints: Vec::new(),
            clamp_negative,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn push(
        &mut self,
        t: T,
        x: T,
        left_derivative: T,
        derivative: T,
        dc: bool,
        flags: NodeFlags,
    ) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.values.push(x);
        self.left_derivatives.push(left_derivative);
        self.derivatives.push(derivative);
        self.dc.push(dc);
        self.flags.push(flags);
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `dx/dt` from the right at each node.
    pub fn derivatives(&self) -> &[T] {
        &self.derivatives
    }

    pub fn flags(&self) -> &[NodeFlags] {
        &self.flags
    }

    /// Times at which integration was restarted.
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    /// `a(t)` at each node.
    pub fn dc_presence(&self) -> &[bool] {
        &self.dc
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> T {
        self.times[0]
    }

    pub fn end(&self) -> T {
        *self.times.last().expect("non-empty trajectory")
    }

    /// True if any node had to be clamped to zero.
    pub fn was_clamped(&self) -> bool {
        self.flags.iter().any(|f| f.clamped)
    }

    /// Value at `t` from the piecewise cubic Hermite interpolant; exact at nodes.
    pub fn interpolate(&self, t: T) -> Result<T> {
        if self.is_empty() || !(t >= self.start() && t <= self.end()) {
            return Err(Error::OutOfSpan {
                t: t.as_f64(),
                start: self.times.first().map_or(f64::NAN, |s| s.as_f64()),
                end: self.times.last().map_or(f64::NAN, |s| s.as_f64()),
            });
        }
        Ok(self.eval(t))
    }

    /// Interpolant without the span check; `t` is clamped into the span. Used for delayed
    /// lookups, which can overshoot the last committed node by rounding only.
    pub(crate) fn eval(&self, t: T) -> T {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        if self.times[i] == t {
            return self.values[i];
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivatives[i] * h, self.left_derivatives[i + 1] * h);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        let v = y0 + h01 * (y1 - y0) + h10 * d0 + h11 * d1;
        if self.clamp_negative && v < T::zero() {
            T::zero()
        } else {
            v
        }
    }

    /// Node indices with `t >= from`.
    pub fn tail_from(&self, from: T) -> std::ops::Range<usize> {
        self.times.partition_point(|&s| s < from)..self.times.len()
    }

    /// CSV with header `t,x,a,regime_flags`, one row per node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,a,regime_flags")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{},{}",
                self.times[i].as_f64(),
                self.values[i].as_f64(),
                u8::from(self.dc[i]),
                self.flags[i].label()
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
