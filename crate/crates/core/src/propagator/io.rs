use super::{PairMeta, TransferPair};
use crate::error::{Error, Result};
use crate::io::{read_complex_block, read_header, write_complex_block, write_header, ContainerKind};
use crate::lattice::Lattice;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

/// Write `<stem>.bin` (header + row-major kernel-unit H then B) and `<stem>.json`.
pub fn write_pair(stem: &Path, pair: &TransferPair) -> Result<()> {
    let lat = pair.lattice();
    let mut w = BufWriter::new(File::create(stem.with_extension("bin"))?);
    write_header(&mut w, ContainerKind::Pair, lat, 2)?;
    write_complex_block(&mut w, pair.h_kernel().as_ref())?;
    write_complex_block(&mut w, pair.b_kernel().as_ref())?;
    w.flush()?;
    let side = serde_json::json!({
        "kind": "transfer-pair",
        "n": lat.len(),
        "dq": lat.dq(),
        "q0": lat.q()[0],
        "layout": "row-major complex f64 little-endian, kernel units: H then B",
        "meta": pair.meta,
    });
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

pub fn read_pair(stem: &Path) -> Result<TransferPair> {
    let mut r = BufReader::new(File::open(stem.with_extension("bin"))?);
    let (kind, n, dq, q0, blocks) = read_header(&mut r)?;
    if kind != ContainerKind::Pair || blocks != 2 {
        return Err(Error::Format("not a transfer-pair container".into()));
    }
    let lattice = Lattice::from_header(n, dq, q0)?;
    let h = read_complex_block(&mut r, n, n)?;
    let b = read_complex_block(&mut r, n, n)?;
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    let meta: PairMeta = serde_json::from_value(side["meta"].clone())?;
    TransferPair::from_kernel(&lattice, h.as_ref(), b.as_ref(), meta)
}
