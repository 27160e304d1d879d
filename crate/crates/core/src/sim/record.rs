//! Shot records and their file formats.
//!
//! See `docs/formats.md` for the byte-level description of the JSONL, CSV and
//! binary encodings.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    /// Per-qubit readout sequence over the plan slots, twirl-corrected.
    pub qubits: Vec<BitString>,
    /// Physical state entering the first plan slot.
    pub prep: BitString,
    /// Per-qubit leading post-selection measurements.
    pub postselect: Vec<BitString>,
    pub ff_value: Option<f64>,
}

impl ShotRecord {
    /// Outcome of all qubits at plan slot `t`.
    pub fn slot(&self, t: usize) -> BitString {
        BitString::from_bits(self.qubits.iter().map(|s| s.get(t)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub n_qubits: usize,
    pub slots: usize,
    pub postselect: usize,
    pub records: Vec<ShotRecord>,
}

const MAGIC: &[u8; 4] = b"PMRB";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Csv,
    Jsonl,
    Bin,
}

impl RecordFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RecordFormat::Csv => "csv",
            RecordFormat::Jsonl => "jsonl",
            RecordFormat::Bin => "bin",
        }
    }
}

fn bits_json(s: &BitString) -> Value {
    Value::Array(s.iter().map(|b| Value::from(b as u8)).collect())
}

fn bits_from_json(v: &Value, width: usize) -> Result<BitString> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Format("expected a bit array".into()))?;
    if arr.len() != width {
        return Err(Error::Format(format!(
            "bit array of length {} where {width} was expected",
            arr.len()
        )));
    }
    arr.iter()
        .map(|b| match b.as_u64() {
            Some(0) => Ok(false),
            Some(1) => Ok(true),
            _ => Err(Error::Format(format!("invalid bit {b}"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(BitString::from_bits)
}

fn pack(bits: impl Iterator<Item = bool>, n_bytes: usize) -> Vec<u8> {
    let mut out = vec![0u8; n_bytes];
    for (i, b) in bits.enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn unpack(bytes: &[u8], i: usize) -> bool {
    bytes[i / 8] >> (i % 8) & 1 == 1
}

impl RecordSet {
    pub fn new(n_qubits: usize, slots: usize, postselect: usize) -> Self {
        Self {
            n_qubits,
            slots,
            postselect,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        for r in &self.records {
            let ok = r.qubits.len() == self.n_qubits
                && r.qubits.iter().all(|s| s.width() == self.slots)
                && r.prep.width() == self.n_qubits
                && r.postselect.len() == self.n_qubits
                && r.postselect.iter().all(|s| s.width() == self.postselect);
            if !ok {
                return Err(Error::Format(format!("shot {} has inconsistent widths", r.shot)));
            }
        }
        Ok(())
    }

    fn header(&self, meta: &Map<String, Value>) -> Value {
        // Structural keys go in last so `meta` cannot shadow them.
        let mut header = meta.clone();
        header.insert("format".into(), json!("parmit-records"));
        header.insert("format_version".into(), json!(FORMAT_VERSION));
        header.insert("n_qubits".into(), json!(self.n_qubits));
        header.insert("slots".into(), json!(self.slots));
        header.insert("postselect".into(), json!(self.postselect));
        header.insert("n_shots".into(), json!(self.records.len()));
        json!({ "header": header })
    }

    /// One header line, then one object per shot. `meta` is copied into the
    /// header.
    pub fn write_jsonl<W: Write>(&self, mut w: W, meta: &Map<String, Value>) -> Result<()> {
        serde_json::to_writer(&mut w, &self.header(meta))?;
        w.write_all(b"\n")?;
        for r in &self.records {
            let obj = json!({
                "shot": r.shot,
                "qubits": r.qubits.iter().map(bits_json).collect::<Vec<_>>(),
                "prep": bits_json(&r.prep),
                "postselect": r.postselect.iter().map(bits_json).collect::<Vec<_>>(),
                "ff_value": r.ff_value,
            });
            serde_json::to_writer(&mut w, &obj)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    fn parse_header(line: &str) -> Result<(Self, Map<String, Value>, usize)> {
        let header: Value = serde_json::from_str(line)?;
        let header = header
            .get("header")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Format("first line must be a header object".into()))?
            .clone();
        let field = |k: &str| {
            header
                .get(k)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| Error::Format(format!("header lacks {k}")))
        };
        if field("format_version")? != FORMAT_VERSION as usize {
            return Err(Error::Format(format!(
                "unsupported format version {}",
                field("format_version")?
            )));
        }
        let set = Self::new(field("n_qubits")?, field("slots")?, field("postselect")?);
        let n_shots = field("n_shots")?;
        Ok((set, header, n_shots))
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<(Self, Map<String, Value>)> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("empty record file".into()))??;
        let (mut set, header, n_shots) = Self::parse_header(&first)?;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(&line)?;
            let seqs = |key: &str, width: usize| -> Result<Vec<BitString>> {
                let arr = v
                    .get(key)
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Format(format!("record lacks {key}")))?;
                if arr.len() != set.n_qubits {
                    return Err(Error::Format(format!("{key} has {} qubits", arr.len())));
                }
                arr.iter().map(|b| bits_from_json(b, width)).collect()
            };
            set.records.push(ShotRecord {
                shot: v
                    .get("shot")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Format("record lacks shot".into()))?,
                qubits: seqs("qubits", set.slots)?,
                prep: bits_from_json(
                    v.get("prep")
                        .ok_or_else(|| Error::Format("record lacks prep".into()))?,
                    set.n_qubits,
                )?,
                postselect: seqs("postselect", set.postselect)?,
                ff_value: v.get("ff_value").and_then(Value::as_f64),
            });
        }
        if set.records.len() != n_shots {
            return Err(Error::Format(format!(
                "header announces {n_shots} shots, file holds {}",
                set.records.len()
            )));
        }
        Ok((set, header))
    }

    /// A `#`-prefixed header line, then `shot,qubit,sequence,prep,postselect,ff_value`,
    /// one row per shot and qubit, bits as `0`/`1` text in slot order.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &Map<String, Value>) -> Result<()> {
        w.write_all(b"# ")?;
        serde_json::to_writer(&mut w, &self.header(meta))?;
        writeln!(w)?;
        writeln!(w, "shot,qubit,sequence,prep,postselect,ff_value")?;
        for r in &self.records {
            for q in 0..self.n_qubits {
                let ff = r.ff_value.map(|v| v.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    r.shot,
                    q,
                    r.qubits[q],
                    r.prep.get(q) as u8,
                    r.postselect[q],
                    ff
                )?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<(Self, Map<String, Value>)> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("empty record file".into()))??;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::Format("CSV records must start with a header comment".into()))?;
        let (mut set, header, n_shots) = Self::parse_header(json)?;
        let bad = |what: &str| Error::Format(format!("bad CSV {what}"));
        let mut current: Option<ShotRecord> = None;
        for line in lines.skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(bad("row"));
            }
            let shot: u64 = cols[0].parse().map_err(|_| bad("shot"))?;
            let q: usize = cols[1].parse().map_err(|_| bad("qubit"))?;
            if q == 0 {
                if let Some(done) = current.take() {
                    set.records.push(done);
                }
                current = Some(ShotRecord {
                    shot,
                    qubits: Vec::with_capacity(set.n_qubits),
                    prep: BitString::zeros(set.n_qubits),
                    postselect: Vec::with_capacity(set.n_qubits),
                    ff_value: if cols[5].is_empty() {
                        None
                    } else {
                        Some(cols[5].parse().map_err(|_| bad("ff_value"))?)
                    },
                });
            }
            let rec = current.as_mut().ok_or_else(|| bad("row order"))?;
            if rec.shot != shot || rec.qubits.len() != q || q >= set.n_qubits {
                return Err(bad("row order"));
            }
            let seq = |text: &str, width: usize| -> Result<BitString> {
                let b: BitString = text.parse().map_err(|_| bad("bits"))?;
                if b.width() != width {
                    return Err(bad("bit width"));
                }
                Ok(b)
            };
            rec.qubits.push(seq(cols[2], set.slots)?);
            rec.prep.set(q, cols[3] == "1");
            rec.postselect.push(seq(cols[4], set.postselect)?);
        }
        if let Some(done) = current {
            set.records.push(done);
        }
        if set.records.len() != n_shots {
            return Err(Error::Format(format!(
                "header announces {n_shots} shots, file holds {}",
                set.records.len()
            )));
        }
        set.check()?;
        Ok((set, header))
    }

    pub fn write_bin<W: Write>(&self, mut w: W) -> Result<()> {
        let narrow = |v: usize, what: &str| {
            u16::try_from(v).map_err(|_| Error::Format(format!("{what} {v} exceeds u16")))
        };
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&narrow(self.n_qubits, "qubit count")?.to_le_bytes())?;
        w.write_all(&narrow(self.slots, "slot count")?.to_le_bytes())?;
        w.write_all(&narrow(self.postselect, "post-selection length")?.to_le_bytes())?;
        let n_shots = u32::try_from(self.records.len())
            .map_err(|_| Error::Format("more than u32::MAX shots".into()))?;
        w.write_all(&n_shots.to_le_bytes())?;
        let (n, k, l) = (self.n_qubits, self.postselect, self.slots);
        for r in &self.records {
            w.write_all(&r.shot.to_le_bytes())?;
            w.write_all(&pack(r.prep.iter(), n.div_ceil(8)))?;
            w.write_all(&pack(
                r.postselect.iter().flat_map(|s| s.iter()),
                (n * k).div_ceil(8),
            ))?;
            w.write_all(&pack(r.qubits.iter().flat_map(|s| s.iter()), (n * l).div_ceil(8)))?;
            w.write_all(&[r.ff_value.is_some() as u8])?;
            w.write_all(&r.ff_value.unwrap_or(0.0).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_bin<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u16_at = |i: usize| u16::from_le_bytes([header[i], header[i + 1]]) as usize;
        if u16_at(4) != FORMAT_VERSION as usize {
            return Err(Error::Format(format!("unsupported version {}", u16_at(4))));
        }
        let (n, l, k) = (u16_at(6), u16_at(8), u16_at(10));
        let n_shots = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let (pb, kb, lb) = (n.div_ceil(8), (n * k).div_ceil(8), (n * l).div_ceil(8));
        let mut buf = vec![0u8; 8 + pb + kb + lb + 1 + 8];
        let mut set = Self::new(n, l, k);
        set.records.reserve(n_shots);
        for _ in 0..n_shots {
            r.read_exact(&mut buf)?;
            let shot = u64::from_le_bytes(buf[..8].try_into().unwrap());
            let prep_b = &buf[8..8 + pb];
            let ps_b = &buf[8 + pb..8 + pb + kb];
            let seq_b = &buf[8 + pb + kb..8 + pb + kb + lb];
            let tail = 8 + pb + kb + lb;
            let ff_value = match buf[tail] {
                0 => None,
                1 => Some(f64::from_le_bytes(buf[tail + 1..tail + 9].try_into().unwrap())),
                f => return Err(Error::Format(format!("invalid feedforward flag {f}"))),
            };
            set.records.push(ShotRecord {
                shot,
                prep: BitString::from_bits((0..n).map(|q| unpack(prep_b, q))),
                postselect: (0..n)
                    .map(|q| BitString::from_bits((0..k).map(|i| unpack(ps_b, q * k + i))))
                    .collect(),
                qubits: (0..n)
                    .map(|q| BitString::from_bits((0..l).map(|t| unpack(seq_b, q * l + t))))
                    .collect(),
                ff_value,
            });
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after the last shot".into()));
        }
        Ok(set)
    }
}
