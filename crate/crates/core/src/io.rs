//! Binary PGM / PFM images and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::scalar::Scalar;

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid("output path", path.display().to_string()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let ctx = || format!("writing {}", path.display());
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(ctx(), e))?;
        f.write_all(bytes).map_err(|e| Error::io(ctx(), e))?;
        f.sync_all().map_err(|e| Error::io(ctx(), e))?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(ctx(), e)
    })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

struct Header<'a> {
    magic: &'a [u8],
    fields: Vec<String>,
    body: &'a [u8],
}

/// Splits a netpbm-style header of `count` whitespace separated fields after
/// the magic, honouring `#` comments, and returns the remaining body after
/// the single whitespace byte that ends the header.
fn split_header<'a>(bytes: &'a [u8], count: usize, origin: &str) -> Result<Header<'a>> {
    let bad = |msg: &str| Error::Parse {
        path: origin.to_string(),
        line: 0,
        msg: msg.to_string(),
    };
    if bytes.len() < 2 {
        return Err(bad("file too short"));
    }
    let magic = &bytes[..2];
    let mut pos = 2;
    let mut fields = Vec::with_capacity(count);
    while fields.len() < count {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if pos >= bytes.len() {
        return Err(bad("missing image data"));
    }
    Ok(Header {
        magic,
        fields,
        body: &bytes[pos + 1..],
    })
}

fn parse_num<V: std::str::FromStr>(s: &str, what: &str, origin: &str) -> Result<V> {
    s.parse().map_err(|_| Error::Parse {
        path: origin.to_string(),
        line: 0,
        msg: format!("bad {what} `{s}`"),
    })
}

/// Decoded binary PGM (`P5`), 8- or 16-bit, with its maxval.
pub fn decode_pgm<T: Scalar>(bytes: &[u8], origin: &str) -> Result<(Image<T>, u32)> {
    let h = split_header(bytes, 3, origin)?;
    if h.magic != b"P5" {
        return Err(Error::Parse {
            path: origin.to_string(),
            line: 0,
            msg: "not a binary PGM (P5)".into(),
        });
    }
    let cols: usize = parse_num(&h.fields[0], "width", origin)?;
    let rows: usize = parse_num(&h.fields[1], "height", origin)?;
    let maxval: u32 = parse_num(&h.fields[2], "maxval", origin)?;
    if cols == 0 || rows == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::invalid("pgm", format!("{origin}: bad header")));
    }
    let dims = Dims::new(rows, cols);
    let wide = maxval > 255;
    let need = dims.len() * if wide { 2 } else { 1 };
    if h.body.len() < need {
        return Err(Error::invalid("pgm", format!("{origin}: truncated pixel data")));
    }
    let data: Vec<T> = if wide {
        h.body[..need]
            .chunks_exact(2)
            .map(|c| T::of(u16::from_be_bytes([c[0], c[1]]) as f64))
            .collect()
    } else {
        h.body[..need].iter().map(|&b| T::of(b as f64)).collect()
    };
    Ok((Image::from_vec(dims, data)?, maxval))
}

pub fn encode_pgm<T: Scalar>(img: &Image<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend(img.to_u8());
    out
}

/// Reads an 8-bit PGM as intensities in `[0, 255]`.
pub fn read_pgm<T: Scalar>(path: &Path) -> Result<Image<T>> {
    let origin = path.display().to_string();
    let (img, maxval) = decode_pgm::<T>(&read_bytes(path)?, &origin)?;
    if maxval > 255 {
        return Err(Error::invalid(
            "pgm",
            format!("{origin}: expected 8-bit image, maxval {maxval}"),
        ));
    }
    Ok(img)
}

pub fn write_pgm<T: Scalar>(path: &Path, img: &Image<T>) -> Result<()> {
    write_atomic(path, &encode_pgm(img))
}

/// Greyscale PFM (`Pf`), little-endian, rows stored bottom to top.
pub fn encode_pfm<T: Scalar>(img: &Image<T>) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", img.cols(), img.rows()).into_bytes();
    for y in (0..img.rows()).rev() {
        for x in 0..img.cols() {
            out.extend((img.get(x, y).as_f64() as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm<T: Scalar>(bytes: &[u8], origin: &str) -> Result<Image<T>> {
    let h = split_header(bytes, 3, origin)?;
    if h.magic != b"Pf" {
        return Err(Error::Parse {
            path: origin.to_string(),
            line: 0,
            msg: "not a greyscale PFM (Pf)".into(),
        });
    }
    let cols: usize = parse_num(&h.fields[0], "width", origin)?;
    let rows: usize = parse_num(&h.fields[1], "height", origin)?;
    let scale: f64 = parse_num(&h.fields[2], "scale", origin)?;
    if cols == 0 || rows == 0 || scale == 0.0 {
        return Err(Error::invalid("pfm", format!("{origin}: bad header")));
    }
    let dims = Dims::new(rows, cols);
    if h.body.len() < 4 * dims.len() {
        return Err(Error::invalid("pfm", format!("{origin}: truncated pixel data")));
    }
    let little = scale < 0.0;
    let mut img = Image::zeros(dims);
    let mut chunks = h.body.chunks_exact(4);
    for y in (0..rows).rev() {
        for x in 0..cols {
            let c = chunks.next().expect("length checked");
            let b = [c[0], c[1], c[2], c[3]];
            let v = if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
            img.set(x, y, T::of(v as f64));
        }
    }
    Ok(img)
}

pub fn write_pfm<T: Scalar>(path: &Path, img: &Image<T>) -> Result<()> {
    write_atomic(path, &encode_pfm(img))
}

/// Ground-truth field from a PFM, or from a PGM (8- or 16-bit) whose stored
/// values are `scale` times the field value.
pub fn read_field(path: &Path, scale: f64) -> Result<Image<f64>> {
    let origin = path.display().to_string();
    let bytes = read_bytes(path)?;
    if bytes.starts_with(b"Pf") {
        decode_pfm(&bytes, &origin)
    } else {
        if !(scale > 0.0) {
            return Err(Error::invalid("field scale", format!("{scale} must be > 0")));
        }
        let (img, _) = decode_pgm::<f64>(&bytes, &origin)?;
        Ok(img.map(|v| v / scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let img = Image::from_fn(Dims::new(3, 5), |x, y| (x * 40 + y * 7) as f64);
        let bytes = encode_pgm(&img);
        let (back, maxval) = decode_pgm::<f64>(&bytes, "t").unwrap();
        assert_eq!(maxval, 255);
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_header_comments_and_16_bit() {
        let mut bytes = b"P5 # comment\n2 1\n# more\n65535\n".to_vec();
        bytes.extend([0x01, 0x00, 0xff, 0xff]);
        let (img, maxval) = decode_pgm::<f64>(&bytes, "t").unwrap();
        assert_eq!(maxval, 65535);
        assert_eq!(img.as_slice(), &[256.0, 65535.0]);
    }

    #[test]
    fn truncated_pgm_is_rejected() {
        assert!(decode_pgm::<f64>(b"P5\n4 4\n255\n\x00\x01", "t").is_err());
        assert!(decode_pgm::<f64>(b"P6\n1 1\n255\n\x00\x00\x00", "t").is_err());
    }

    #[test]
    fn pfm_round_trip_keeps_row_order() {
        let img = Image::from_fn(Dims::new(4, 3), |x, y| x as f64 - 2.5 * y as f64);
        let back = decode_pfm::<f64>(&encode_pfm(&img), "t").unwrap();
        assert_eq!(back, img);
        // First stored row is the bottom image row.
        let bytes = encode_pfm(&img);
        let body = &bytes[bytes.len() - 12 * 4..];
        assert_eq!(f32::from_le_bytes([body[0], body[1], body[2], body[3]]), -7.5);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("gcmp-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.bin");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
