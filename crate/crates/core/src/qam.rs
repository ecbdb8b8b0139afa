//! Gray-mapped QAM constellations for the comparison baseline.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unit-average-energy QAM constellation indexed by its bit label.
#[derive(Clone, Debug, PartialEq)]
pub struct QamConstellation {
    points: Vec<Complex64>,
    bits: usize,
}

fn gray_pam(bits: usize) -> Vec<f64> {
    // Amplitude of each label on a 2^bits-level Gray-coded PAM axis.
    let levels = 1usize << bits;
    let mut amp = vec![0.0; levels];
    for i in 0..levels {
        let label = i ^ (i >> 1);
        amp[label] = 2.0 * i as f64 - (levels as f64 - 1.0);
    }
    amp
}

impl QamConstellation {
    /// Supported orders: 2 (BPSK), 4, 8 (rectangular 4x2), 16, 64, 256.
    pub fn new(order: usize) -> Result<Self> {
        let (i_bits, q_bits) = match order {
            2 => (1, 0),
            4 => (1, 1),
            8 => (2, 1),
            16 => (2, 2),
            64 => (3, 3),
            256 => (4, 4),
            _ => return Err(Error::Unsupported(format!("{order}-QAM"))),
        };
        let i_axis = gray_pam(i_bits);
        let q_axis = if q_bits == 0 { vec![0.0] } else { gray_pam(q_bits) };
        let mut points = Vec::with_capacity(order);
        for label in 0..order {
            let i = label >> q_bits;
            let q = label & ((1 << q_bits) - 1);
            points.push(Complex64::new(i_axis[i], q_axis[q]));
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = energy.sqrt().recip();
        for p in &mut points {
            *p *= scale;
        }
        Ok(QamConstellation {
            points,
            bits: i_bits + q_bits,
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    /// Point for a big-endian bit label.
    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn avg_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }
}

/// Big-endian label of `bits`.
pub fn label_of(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_energy_and_gray_neighbors() {
        for order in [2, 4, 8, 16, 64] {
            let c = QamConstellation::new(order).unwrap();
            assert_abs_diff_eq!(c.avg_energy(), 1.0, epsilon = 1e-12);
            let dmin = (0..order)
                .flat_map(|a| (0..order).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| (c.point(a) - c.point(b)).norm())
                .fold(f64::INFINITY, f64::min);
            // Nearest neighbours differ in exactly one bit.
            for a in 0..order {
                for b in 0..order {
                    if a != b && (c.point(a) - c.point(b)).norm() < dmin + 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "{order}-QAM labels {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn sixteen_qam_corner() {
        let c = QamConstellation::new(16).unwrap();
        let s = 10f64.sqrt().recip();
        assert_abs_diff_eq!(c.point(0).re, -3.0 * s, epsilon = 1e-12);
        assert_abs_diff_eq!(c.point(0).im, -3.0 * s, epsilon = 1e-12);
        assert!(QamConstellation::new(32).is_err());
        assert_eq!(label_of(&[true, false, true]), 5);
    }
}
