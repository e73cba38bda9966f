//! Portable graymap I/O: binary P5 is emitted, ASCII P2 is also accepted
//! on read. Maxval is always written as 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::DataError;
use crate::types::Heatmap;

pub fn write_pgm(path: &Path, map: &Heatmap) -> Result<(), DataError> {
    let mut buf = Vec::with_capacity(32 + map.values().len());
    write!(buf, "P5\n{} {}\n255\n", map.width(), map.height())
        .expect("writing to a Vec cannot fail");
    buf.extend_from_slice(map.values());
    fs::write(path, buf).map_err(|e| DataError::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<Heatmap, DataError> {
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    let parse = |detail: &str| DataError::parse(path, detail);

    let mut pos = 0usize;
    let mut next_token = |bytes: &[u8]| -> Option<(usize, usize)> {
        // skip whitespace and '#' comments
        let mut i = pos;
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            break;
        }
        if i >= bytes.len() {
            return None;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        pos = i;
        Some((start, i))
    };

    let token = |range: Option<(usize, usize)>, what: &str| -> Result<String, DataError> {
        let (s, e) = range.ok_or_else(|| parse(&format!("missing {what}")))?;
        Ok(String::from_utf8_lossy(&bytes[s..e]).into_owned())
    };

    let magic = token(next_token(&bytes), "magic")?;
    if magic != "P5" && magic != "P2" {
        return Err(parse(&format!("unsupported magic {magic:?}, want P2 or P5")));
    }
    let width: usize = token(next_token(&bytes), "width")?
        .parse()
        .map_err(|_| parse("width is not an integer"))?;
    let height: usize = token(next_token(&bytes), "height")?
        .parse()
        .map_err(|_| parse("height is not an integer"))?;
    let maxval: usize = token(next_token(&bytes), "maxval")?
        .parse()
        .map_err(|_| parse("maxval is not an integer"))?;
    if maxval == 0 || maxval > 255 {
        return Err(parse(&format!("maxval {maxval} outside 1..=255")));
    }
    let n = width * height;

    let values: Vec<u8> = if magic == "P5" {
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() {
            return Err(parse("truncated raster"));
        }
        pos += 1;
        if bytes.len() < pos + n {
            return Err(parse(&format!(
                "raster holds {} bytes, expected {}",
                bytes.len().saturating_sub(pos),
                n
            )));
        }
        bytes[pos..pos + n].to_vec()
    } else {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let t = token(next_token(&bytes), "pixel")?;
            let v: usize = t
                .parse()
                .map_err(|_| parse(&format!("pixel {t:?} is not an integer")))?;
            if v > maxval {
                return Err(parse(&format!("pixel {v} exceeds maxval {maxval}")));
            }
            out.push(v as u8);
        }
        out
    };

    Heatmap::from_values(width, height, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p5_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.pgm");
        let values: Vec<u8> = (0..(6 * 4)).map(|v| (v * 11 % 256) as u8).collect();
        let map = Heatmap::from_values(6, 4, values).unwrap();
        write_pgm(&path, &map).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), map);
    }

    #[test]
    fn p2_ascii_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ascii.pgm");
        std::fs::write(&path, "P2\n# comment\n3 2\n255\n0 10 20\n255 128 1\n").unwrap();
        let map = read_pgm(&path).unwrap();
        assert_eq!(map.width(), 3);
        assert_eq!(map.height(), 2);
        assert_eq!(map.values(), &[0, 10, 20, 255, 128, 1]);
    }

    #[test]
    fn truncated_raster_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.pgm");
        std::fs::write(&path, b"P5\n4 4\n255\nab".to_vec()).unwrap();
        assert!(matches!(read_pgm(&path), Err(DataError::Parse { .. })));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_pgm(Path::new("/nonexistent/missing.pgm")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("missing.pgm"), "{msg}");
    }
}
