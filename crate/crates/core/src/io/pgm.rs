//! Binary greyscale (P5) images of weight matrices.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Encodes `m` (rows = inputs, columns = outputs) as an image with one row
/// per output and one column per input. `min` maps to white, `max` to black.
pub fn encode_pgm(m: &Matrix, min: f64, max: f64) -> Result<Vec<u8>> {
    if !(max > min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::config("range", format!("need finite min < max, got [{min}, {max}]")));
    }
    let (inputs, outputs) = m.shape();
    let mut out = format!("P5\n{inputs} {outputs}\n255\n").into_bytes();
    out.reserve(inputs * outputs);
    for i in 0..outputs {
        for j in 0..inputs {
            out.push(pixel(m.get(j, i), min, max));
        }
    }
    Ok(out)
}

/// Grey level of `x`: 255 at `min`, 0 at `max`, floor of the linear map
/// between, clamped outside.
pub fn pixel(x: f64, min: f64, max: f64) -> u8 {
    let f = ((x - min) / (max - min)).clamp(0.0, 1.0);
    if f.is_nan() {
        return 255;
    }
    (255.0 * (1.0 - f)).floor() as u8
}

pub fn write_pgm(path: &Path, m: &Matrix, min: f64, max: f64) -> Result<()> {
    let bytes = encode_pgm(m, min, max)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_levels() {
        assert_eq!(pixel(0.0, 0.0, 1.0), 255);
        assert_eq!(pixel(1.0, 0.0, 1.0), 0);
        assert_eq!(pixel(0.5, 0.0, 1.0), 127);
        assert_eq!(pixel(-3.0, 0.0, 1.0), 255);
        assert_eq!(pixel(7.0, 0.0, 1.0), 0);
    }

    #[test]
    fn zero_matrix_is_white() {
        let bytes = encode_pgm(&Matrix::zeros(3, 2), 0.0, 1.0).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 255));
        assert_eq!(bytes.len(), header.len() + 6);
    }

    #[test]
    fn outputs_are_rows() {
        let mut m = Matrix::zeros(3, 2);
        m.set(2, 0, 1.0);
        let bytes = encode_pgm(&m, 0.0, 1.0).unwrap();
        let px = &bytes[b"P5\n3 2\n255\n".len()..];
        assert_eq!(px, &[255, 255, 0, 255, 255, 255]);
    }

    #[test]
    fn degenerate_range_rejected() {
        assert!(encode_pgm(&Matrix::zeros(1, 1), 1.0, 1.0).is_err());
        assert!(encode_pgm(&Matrix::zeros(1, 1), 1.0, 0.0).is_err());
    }
}
