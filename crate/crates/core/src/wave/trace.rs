use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::inverse_source::TimeSignal;
use crate::quadrature::end_factor;

/// Boundary data recorded on the two damped sides at every time level.
///
/// `normal[s]` holds the one-sided normal derivative on side `s`
/// (0: `y = 0`, 1: `x = 0`), row-major `[step][node]`; `check[s]` holds the
/// boundary-condition value `-a v` at the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    n: usize,
    dt: f64,
    steps: usize,
    normal: [Vec<f64>; 2],
    check: [Vec<f64>; 2],
}

impl BoundaryTrace {
    pub fn with_capacity(n: usize, dt: f64, steps: usize) -> Self {
        let cap = n * (steps + 1);
        Self {
            n,
            dt,
            steps: 0,
            normal: [Vec::with_capacity(cap), Vec::with_capacity(cap)],
            check: [Vec::with_capacity(cap), Vec::with_capacity(cap)],
        }
    }

    pub fn from_parts(
        n: usize,
        dt: f64,
        steps: usize,
        normal: [Vec<f64>; 2],
        check: [Vec<f64>; 2],
    ) -> Result<Self> {
        let len = n * (steps + 1);
        if normal.iter().chain(&check).any(|v| v.len() != len) {
            return Err(invalid(format!(
                "trace blocks must hold {len} values for n = {n}, steps = {steps}"
            )));
        }
        Ok(Self {
            n,
            dt,
            steps,
            normal,
            check,
        })
    }

    /// Append one time level. The first push is level 0.
    pub(crate) fn push(&mut self, normal: [&[f64]; 2], check: [&[f64]; 2]) {
        for s in 0..2 {
            self.normal[s].extend_from_slice(normal[s]);
            self.check[s].extend_from_slice(check[s]);
        }
        self.steps = self.normal[0].len() / self.n - 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn normal(&self, side: usize) -> &[f64] {
        &self.normal[side]
    }

    pub fn check(&self, side: usize) -> &[f64] {
        &self.check[side]
    }

    /// Normal derivative on `side` at time level `step`.
    pub fn at(&self, side: usize, step: usize) -> &[f64] {
        &self.normal[side][step * self.n..(step + 1) * self.n]
    }

    fn weighted_sq(&self, data: &[f64], step: usize) -> f64 {
        let h = 1.0 / (self.n - 1) as f64;
        data[step * self.n..(step + 1) * self.n]
            .iter()
            .enumerate()
            .map(|(k, x)| end_factor(k, self.n) * h * x * x)
            .sum()
    }

    /// `|d_nu u|_{L2(Sigma_1)}` with trapezoid rules in space and time.
    pub fn l2_norm(&self) -> f64 {
        let mut total = 0.0;
        for step in 0..=self.steps {
            let w = end_factor(step, self.steps + 1) * self.dt;
            for s in 0..2 {
                total += w * self.weighted_sq(&self.normal[s], step);
            }
        }
        total.sqrt()
    }

    /// Largest pointwise gap between the one-sided derivative and `-a v`.
    pub fn max_check_gap(&self) -> f64 {
        (0..2)
            .flat_map(|s| self.normal[s].iter().zip(&self.check[s]))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.normal
            .iter()
            .flatten()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    /// Difference `self - other` of traces on identical time grids.
    pub fn difference(&self, other: &BoundaryTrace) -> Result<BoundaryTrace> {
        if self.n != other.n || self.steps != other.steps || self.dt != other.dt {
            return Err(invalid("traces live on different grids"));
        }
        let sub = |a: &Vec<f64>, b: &Vec<f64>| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x - y).collect()
        };
        Ok(BoundaryTrace {
            n: self.n,
            dt: self.dt,
            steps: self.steps,
            normal: [
                sub(&self.normal[0], &other.normal[0]),
                sub(&self.normal[1], &other.normal[1]),
            ],
            check: [
                sub(&self.check[0], &other.check[0]),
                sub(&self.check[1], &other.check[1]),
            ],
        })
    }

    /// Normal derivative as a signal in the concatenated side space.
    pub fn to_signal(&self) -> TimeSignal {
        let n = self.n;
        let dim = 2 * n;
        let mut samples = Vec::with_capacity(dim * (self.steps + 1));
        for step in 0..=self.steps {
            samples.extend_from_slice(self.at(0, step));
            samples.extend_from_slice(self.at(1, step));
        }
        let h = 1.0 / (n - 1) as f64;
        let weights = (0..dim).map(|c| h * end_factor(c % n, n)).collect();
        TimeSignal::with_weights(self.dt, dim, samples, weights)
            .expect("trace blocks have consistent sizes")
    }

    /// CSV with columns `t,i,value`; `i` runs over the `y = 0` nodes first,
    /// then the `x = 0` nodes.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "i", "value"])?;
        for step in 0..=self.steps {
            let t = (step as f64 * self.dt).to_string();
            for s in 0..2 {
                for (k, x) in self.at(s, step).iter().enumerate() {
                    w.write_record([t.as_str(), &(s * self.n + k).to_string(), &x.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Little-endian dump: header `n: u64, steps: u64, dt: f64, sides: u64`,
    /// then `sides` row-major blocks (normal y=0, normal x=0, check y=0, check x=0).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.steps as u64).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&4u64.to_le_bytes())?;
        for block in self.normal.iter().chain(&self.check) {
            let mut buf = Vec::with_capacity(block.len() * 8);
            for x in block {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let steps = u64::from_le_bytes(next(&mut r)?) as usize;
        let dt = f64::from_le_bytes(next(&mut r)?);
        let sides = u64::from_le_bytes(next(&mut r)?) as usize;
        if n < 2 || !(sides == 2 || sides == 4) {
            return Err(Error::Format(format!(
                "bad trace header: n = {n}, side count = {sides}"
            )));
        }
        let len = n
            .checked_mul(steps + 1)
            .ok_or_else(|| Error::Format("trace size overflows".into()))?;
        let mut blocks = Vec::with_capacity(sides);
        let mut bytes = vec![0u8; len * 8];
        for _ in 0..sides {
            r.read_exact(&mut bytes)?;
            blocks.push(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect::<Vec<f64>>(),
            );
        }
        if sides == 2 {
            blocks.push(vec![0.0; len]);
            blocks.push(vec![0.0; len]);
        }
        let mut it = blocks.into_iter();
        let normal = [it.next().unwrap(), it.next().unwrap()];
        let check = [it.next().unwrap(), it.next().unwrap()];
        Self::from_parts(n, dt, steps, normal, check)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        self.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BoundaryTrace {
        let n = 5;
        let steps = 3;
        let len = n * (steps + 1);
        let f = |k: usize, c: f64| -> Vec<f64> { (0..len).map(|i| (i + k) as f64 * c).collect() };
        BoundaryTrace::from_parts(n, 0.1, steps, [f(0, 0.3), f(1, -1.0 / 3.0)], [f(2, 1e-300), f(3, 7.0)])
            .unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 4 * 20 * 8);
        let back = BoundaryTrace::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let mut buf = Vec::new();
        sample().write_binary(&mut buf).unwrap();
        buf.truncate(100);
        assert!(BoundaryTrace::read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        sample().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,i,value");
        assert_eq!(lines.len(), 1 + 4 * 10);
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[6], "0,5,-0.3333333333333333");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn constant_trace_norm() {
        // unit value on both sides for tau = 1: |1|^2 = 2 * 1 * 1
        let n = 9;
        let steps = 10;
        let ones = vec![1.0; n * (steps + 1)];
        let t = BoundaryTrace::from_parts(n, 0.1, steps, [ones.clone(), ones.clone()], [ones.clone(), ones])
            .unwrap();
        assert!((t.l2_norm() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.max_check_gap(), 0.0);
    }
}
