//! Binary PGM (P5) writer shared by count heatmaps and risk maps.

use crate::Result;
use std::io::Write;

/// Round-half-up to u8.
pub(crate) fn scale_to_u8(value: f64, max: f64) -> u8 {
    if max <= 0.0 {
        return 0;
    }
    let scaled = value * 255.0 / max;
    let rounded = (scaled + 0.5).floor();
    rounded.clamp(0.0, 255.0) as u8
}

/// Write `values` (row-major, `width * height`, all >= 0) as an 8-bit PGM,
/// linearly scaled so the maximum value maps to 255. An all-zero field
/// yields an all-zero image.
pub(crate) fn write_pgm<W: Write>(w: &mut W, width: usize, height: usize, values: &[f64]) -> Result<()> {
    assert_eq!(values.len(), width * height);
    let max = values.iter().cloned().fold(0.0, f64::max);
    write!(w, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = values.iter().map(|&v| scale_to_u8(v, max)).collect();
    w.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_endpoints() {
        assert_eq!(scale_to_u8(5.0, 5.0), 255);
        assert_eq!(scale_to_u8(0.0, 5.0), 0);
        assert_eq!(scale_to_u8(0.0, 0.0), 0);
    }

    #[test]
    fn round_half_up() {
        // 2 of max 4 -> 127.5 -> 128
        assert_eq!(scale_to_u8(2.0, 4.0), 128);
        assert_eq!(scale_to_u8(4.0, 4.0), 255);
    }

    #[test]
    fn header_and_payload() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 2, 1, &[0.0, 3.0]).unwrap();
        assert_eq!(&buf, b"P5\n2 1\n255\n\x00\xff");
    }
}
