//! Debug packet dump: a sequence of records, each a 16-byte header followed
//! by a 4-byte big-endian length and the encoded message.
//!
//! Header: time in ns (u64), node index (u32), face id (u16), direction
//! (u8, 0 = received, 1 = sent), reserved (u8, 0). All big endian.

use std::io::{self, Read, Write};

use crate::message::{CodecError, Message};
use crate::sim::SimTime;

pub const RECORD_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Received,
    Sent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpRecord {
    pub time: SimTime,
    pub node: u32,
    pub face: u16,
    pub direction: Direction,
    pub message: Message,
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("record {index}: {source}")]
    Codec { index: usize, source: CodecError },
    #[error("record {index}: bad direction flag {flag}")]
    Direction { index: usize, flag: u8 },
}

pub struct DumpWriter<W: Write> {
    inner: W,
}

impl<W: Write> DumpWriter<W> {
    pub fn new(inner: W) -> Self {
        DumpWriter { inner }
    }

    pub fn write(&mut self, rec: &DumpRecord) -> Result<(), DumpError> {
        let bytes = rec
            .message
            .encode()
            .map_err(|source| DumpError::Codec { index: 0, source })?;
        let mut header = [0u8; RECORD_HEADER_LEN];
        header[..8].copy_from_slice(&rec.time.as_nanos().to_be_bytes());
        header[8..12].copy_from_slice(&rec.node.to_be_bytes());
        header[12..14].copy_from_slice(&rec.face.to_be_bytes());
        header[14] = match rec.direction {
            Direction::Received => 0,
            Direction::Sent => 1,
        };
        self.inner.write_all(&header)?;
        self.inner.write_all(&(bytes.len() as u32).to_be_bytes())?;
        self.inner.write_all(&bytes)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), DumpError> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Reads every record from `r`.
pub fn read_all<R: Read>(mut r: R) -> Result<Vec<DumpRecord>, DumpError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < data.len() {
        let index = out.len();
        let truncated = || DumpError::Io(io::Error::new(io::ErrorKind::UnexpectedEof, format!("record {index} truncated")));
        let header = data.get(pos..pos + RECORD_HEADER_LEN + 4).ok_or_else(truncated)?;
        let time = SimTime::from_nanos(u64::from_be_bytes(header[..8].try_into().unwrap()));
        let node = u32::from_be_bytes(header[8..12].try_into().unwrap());
        let face = u16::from_be_bytes(header[12..14].try_into().unwrap());
        let direction = match header[14] {
            0 => Direction::Received,
            1 => Direction::Sent,
            flag => return Err(DumpError::Direction { index, flag }),
        };
        let len = u32::from_be_bytes(header[16..20].try_into().unwrap()) as usize;
        pos += RECORD_HEADER_LEN + 4;
        let body = data.get(pos..pos + len).ok_or_else(truncated)?;
        let message = Message::decode(body).map_err(|source| DumpError::Codec { index, source })?;
        pos += len;
        out.push(DumpRecord {
            time,
            node,
            face,
            direction,
            message,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::Interest;
    use crate::name::ContentName;

    #[test]
    fn write_then_read() {
        let rec = DumpRecord {
            time: SimTime::from_micros(1234),
            node: 3,
            face: 2,
            direction: Direction::Sent,
            message: Message::Interest(Interest::new(
                ContentName::parse("ccnx:/site/content0").unwrap().with_segment(4),
            )),
        };
        let mut w = DumpWriter::new(Vec::new());
        w.write(&rec).unwrap();
        w.write(&DumpRecord { direction: Direction::Received, ..rec.clone() }).unwrap();
        let bytes = w.into_inner();
        assert_eq!(bytes.len(), 2 * (RECORD_HEADER_LEN + 4 + 50));
        let back = read_all(&bytes[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], rec);
        assert_eq!(back[1].direction, Direction::Received);
        assert!(read_all(&bytes[..bytes.len() - 1]).is_err());
    }
}
