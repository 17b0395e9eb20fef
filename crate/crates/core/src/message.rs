//! The three CCN message kinds, their wire-size model and a TLV byte codec.
//!
//! Layout: an 8-byte fixed header followed by top-level TLVs with 2-byte type
//! and 2-byte length fields (big endian).
//!
//! ```text
//! byte 0     version (1)
//! byte 1     packet type: 0 Interest, 1 Content Object, 2 Interest Return
//! bytes 2-3  total packet length
//! Interest / Interest Return:
//!   byte 4   hop limit
//!   byte 5   return code (0 for a plain Interest)
//!   byte 6   reserved (0)
//! Content Object:
//!   bytes 4-6  total segments (24-bit)
//! byte 7     header length (8)
//! ```
//!
//! Interest body: Name, InterestLifetime (2 bytes, ms).
//! Content Object body: Name, Expiry (8 bytes, ms, opaque), Payload.
//! A Name TLV holds one NameSegment TLV per component followed by a Chunk TLV
//! (8-byte segment number) when the name has a segment.

use thiserror::Error;

use crate::name::ContentName;
use crate::sim::SimTime;

pub const FIXED_HEADER_LEN: usize = 8;
pub const TLV_HEADER_LEN: usize = 4;
pub const VERSION: u8 = 1;
pub const MAX_PACKET_LEN: usize = u16::MAX as usize;
pub const MAX_TOTAL_SEGMENTS: u32 = 0x00FF_FFFF;

pub const DEFAULT_HOP_LIMIT: u8 = 64;
pub const DEFAULT_LIFETIME_MS: u16 = 2_000;

pub const T_NAME: u16 = 0x0000;
pub const T_NAME_SEGMENT: u16 = 0x0001;
pub const T_CHUNK: u16 = 0x0010;
pub const T_INTEREST_LIFETIME: u16 = 0x0002;
pub const T_EXPIRY: u16 = 0x0006;
pub const T_PAYLOAD: u16 = 0x0003;

const PT_INTEREST: u8 = 0;
const PT_CONTENT_OBJECT: u8 = 1;
const PT_INTEREST_RETURN: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interest {
    pub name: ContentName,
    pub hop_limit: u8,
    pub lifetime_ms: u16,
}

impl Interest {
    pub fn new(name: ContentName) -> Self {
        Interest {
            name,
            hop_limit: DEFAULT_HOP_LIMIT,
            lifetime_ms: DEFAULT_LIFETIME_MS,
        }
    }

    pub fn lifetime(&self) -> SimTime {
        SimTime::from_millis(self.lifetime_ms as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContentObject {
    pub name: ContentName,
    pub payload_size: u32,
    /// Carried opaquely, never enforced.
    pub expiry_ms: u64,
    pub total_segments: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnCode {
    NoRoute,
    HopLimitExceeded,
}

impl ReturnCode {
    fn to_wire(self) -> u8 {
        match self {
            ReturnCode::NoRoute => 1,
            ReturnCode::HopLimitExceeded => 2,
        }
    }

    fn from_wire(b: u8) -> Option<Self> {
        match b {
            1 => Some(ReturnCode::NoRoute),
            2 => Some(ReturnCode::HopLimitExceeded),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InterestReturn {
    pub original: Interest,
    pub return_code: ReturnCode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Message {
    Interest(Interest),
    ContentObject(ContentObject),
    InterestReturn(InterestReturn),
}

impl Message {
    pub fn name(&self) -> &ContentName {
        match self {
            Message::Interest(i) => &i.name,
            Message::ContentObject(o) => &o.name,
            Message::InterestReturn(r) => &r.original.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Message::Interest(_) => "interest",
            Message::ContentObject(_) => "content_object",
            Message::InterestReturn(_) => "interest_return",
        }
    }

    /// Size in bytes of the encoded message. Pure function of the content.
    pub fn encoded_size(&self) -> usize {
        match self {
            Message::Interest(i) | Message::InterestReturn(InterestReturn { original: i, .. }) => {
                interest_size(i)
            }
            Message::ContentObject(o) => {
                FIXED_HEADER_LEN
                    + name_tlv_size(&o.name)
                    + TLV_HEADER_LEN
                    + 8
                    + TLV_HEADER_LEN
                    + o.payload_size as usize
            }
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, CodecError> {
        let size = self.encoded_size();
        if size > MAX_PACKET_LEN {
            return Err(CodecError::Oversize { size });
        }
        let mut out = Vec::with_capacity(size);
        out.push(VERSION);
        match self {
            Message::Interest(i) => {
                out.push(PT_INTEREST);
                out.extend_from_slice(&(size as u16).to_be_bytes());
                out.extend_from_slice(&[i.hop_limit, 0, 0, FIXED_HEADER_LEN as u8]);
                encode_interest_body(i, &mut out)?;
            }
            Message::InterestReturn(r) => {
                out.push(PT_INTEREST_RETURN);
                out.extend_from_slice(&(size as u16).to_be_bytes());
                out.extend_from_slice(&[
                    r.original.hop_limit,
                    r.return_code.to_wire(),
                    0,
                    FIXED_HEADER_LEN as u8,
                ]);
                encode_interest_body(&r.original, &mut out)?;
            }
            Message::ContentObject(o) => {
                if o.total_segments > MAX_TOTAL_SEGMENTS {
                    return Err(CodecError::FieldRange {
                        field: "total_segments",
                    });
                }
                out.push(PT_CONTENT_OBJECT);
                out.extend_from_slice(&(size as u16).to_be_bytes());
                out.extend_from_slice(&o.total_segments.to_be_bytes()[1..]);
                out.push(FIXED_HEADER_LEN as u8);
                encode_name(&o.name, &mut out)?;
                put_tlv_header(&mut out, T_EXPIRY, 8);
                out.extend_from_slice(&o.expiry_ms.to_be_bytes());
                put_tlv_header(&mut out, T_PAYLOAD, o.payload_size as usize);
                out.resize(out.len() + o.payload_size as usize, 0);
            }
        }
        debug_assert_eq!(out.len(), size);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Message, CodecError> {
        Decoder::new(bytes).message()
    }
}

fn name_tlv_size(name: &ContentName) -> usize {
    let comps: usize = name
        .components()
        .iter()
        .map(|c| TLV_HEADER_LEN + c.len())
        .sum();
    let chunk = if name.segment().is_some() {
        TLV_HEADER_LEN + 8
    } else {
        0
    };
    TLV_HEADER_LEN + comps + chunk
}

fn interest_size(i: &Interest) -> usize {
    FIXED_HEADER_LEN + name_tlv_size(&i.name) + TLV_HEADER_LEN + 2
}

fn put_tlv_header(out: &mut Vec<u8>, t: u16, len: usize) {
    out.extend_from_slice(&t.to_be_bytes());
    out.extend_from_slice(&(len as u16).to_be_bytes());
}

fn encode_name(name: &ContentName, out: &mut Vec<u8>) -> Result<(), CodecError> {
    let inner = name_tlv_size(name) - TLV_HEADER_LEN;
    if inner > u16::MAX as usize {
        return Err(CodecError::Oversize { size: inner });
    }
    put_tlv_header(out, T_NAME, inner);
    for c in name.components() {
        put_tlv_header(out, T_NAME_SEGMENT, c.len());
        out.extend_from_slice(c);
    }
    if let Some(seg) = name.segment() {
        put_tlv_header(out, T_CHUNK, 8);
        out.extend_from_slice(&seg.to_be_bytes());
    }
    Ok(())
}

fn encode_interest_body(i: &Interest, out: &mut Vec<u8>) -> Result<(), CodecError> {
    encode_name(&i.name, out)?;
    put_tlv_header(out, T_INTEREST_LIFETIME, 2);
    out.extend_from_slice(&i.lifetime_ms.to_be_bytes());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("truncated fixed header: {len} bytes")]
    ShortHeader { len: usize },
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("unknown packet type {0}")]
    PacketType(u8),
    #[error("bad header field {field} at offset {offset}")]
    Header { offset: usize, field: &'static str },
    #[error("truncated TLV type {tlv_type:#06x} at offset {offset}")]
    Truncated { offset: usize, tlv_type: u16 },
    #[error("unexpected TLV type {tlv_type:#06x} at offset {offset}")]
    UnknownTlv { offset: usize, tlv_type: u16 },
    #[error("TLV type {tlv_type:#06x} at offset {offset} has invalid length {len}")]
    BadLength {
        offset: usize,
        tlv_type: u16,
        len: usize,
    },
    #[error("packet length field says {declared} but buffer has {actual} bytes")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("missing segment number in name")]
    MissingSegment,
    #[error("message needs at least one name component")]
    EmptyName,
    #[error("encoded message would be {size} bytes, over the 16-bit length limit")]
    Oversize { size: usize },
    #[error("field {field} out of range")]
    FieldRange { field: &'static str },
}

struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    /// Reads a TLV header of the expected type and returns `(offset, value)`.
    fn tlv(&mut self, expected: u16, end: usize) -> Result<(usize, &'a [u8]), CodecError> {
        let offset = self.pos;
        if offset + TLV_HEADER_LEN > end {
            return Err(CodecError::Truncated {
                offset,
                tlv_type: expected,
            });
        }
        let t = u16::from_be_bytes([self.buf[offset], self.buf[offset + 1]]);
        if t != expected {
            return Err(CodecError::UnknownTlv {
                offset,
                tlv_type: t,
            });
        }
        let len = u16::from_be_bytes([self.buf[offset + 2], self.buf[offset + 3]]) as usize;
        let start = offset + TLV_HEADER_LEN;
        if start + len > end {
            return Err(CodecError::Truncated {
                offset,
                tlv_type: t,
            });
        }
        self.pos = start + len;
        Ok((offset, &self.buf[start..start + len]))
    }

    fn fixed<const N: usize>(&mut self, t: u16, end: usize) -> Result<[u8; N], CodecError> {
        let (offset, v) = self.tlv(t, end)?;
        v.try_into().map_err(|_| CodecError::BadLength {
            offset,
            tlv_type: t,
            len: v.len(),
        })
    }

    fn name(&mut self) -> Result<ContentName, CodecError> {
        let (offset, value) = self.tlv(T_NAME, self.buf.len())?;
        let end = self.pos;
        let mut inner = Decoder {
            buf: self.buf,
            pos: offset + TLV_HEADER_LEN,
        };
        debug_assert_eq!(inner.pos + value.len(), end);
        let mut components = Vec::new();
        let mut segment = None;
        while inner.pos < end {
            let offset = inner.pos;
            if offset + 2 > end {
                return Err(CodecError::Truncated {
                    offset,
                    tlv_type: T_NAME_SEGMENT,
                });
            }
            let t = u16::from_be_bytes([self.buf[offset], self.buf[offset + 1]]);
            match t {
                T_NAME_SEGMENT if segment.is_none() => {
                    let (offset, v) = inner.tlv(T_NAME_SEGMENT, end)?;
                    if v.is_empty() {
                        return Err(CodecError::BadLength {
                            offset,
                            tlv_type: t,
                            len: 0,
                        });
                    }
                    components.push(v.to_vec());
                }
                T_CHUNK if segment.is_none() => {
                    segment = Some(u64::from_be_bytes(inner.fixed::<8>(T_CHUNK, end)?));
                }
                _ => {
                    return Err(CodecError::UnknownTlv {
                        offset,
                        tlv_type: t,
                    })
                }
            }
        }
        let name = ContentName::from_components(components).ok_or(CodecError::EmptyName)?;
        Ok(match segment {
            Some(s) => name.with_segment(s),
            None => name,
        })
    }

    fn message(&mut self) -> Result<Message, CodecError> {
        let buf = self.buf;
        if buf.len() < FIXED_HEADER_LEN {
            return Err(CodecError::ShortHeader { len: buf.len() });
        }
        if buf[0] != VERSION {
            return Err(CodecError::Version(buf[0]));
        }
        let ptype = buf[1];
        let declared = u16::from_be_bytes([buf[2], buf[3]]) as usize;
        if buf[7] as usize != FIXED_HEADER_LEN {
            return Err(CodecError::Header {
                offset: 7,
                field: "header_length",
            });
        }
        self.pos = FIXED_HEADER_LEN;
        let msg = match ptype {
            PT_INTEREST | PT_INTEREST_RETURN => {
                if buf[6] != 0 {
                    return Err(CodecError::Header {
                        offset: 6,
                        field: "reserved",
                    });
                }
                let name = self.name()?;
                let lifetime_ms = u16::from_be_bytes(self.fixed::<2>(T_INTEREST_LIFETIME, buf.len())?);
                if name.segment().is_none() {
                    return Err(CodecError::MissingSegment);
                }
                if lifetime_ms == 0 {
                    return Err(CodecError::FieldRange {
                        field: "lifetime",
                    });
                }
                let interest = Interest {
                    name,
                    hop_limit: buf[4],
                    lifetime_ms,
                };
                if ptype == PT_INTEREST {
                    if buf[5] != 0 {
                        return Err(CodecError::Header {
                            offset: 5,
                            field: "return_code",
                        });
                    }
                    Message::Interest(interest)
                } else {
                    let return_code = ReturnCode::from_wire(buf[5]).ok_or(CodecError::Header {
                        offset: 5,
                        field: "return_code",
                    })?;
                    Message::InterestReturn(InterestReturn {
                        original: interest,
                        return_code,
                    })
                }
            }
            PT_CONTENT_OBJECT => {
                let total_segments = u32::from_be_bytes([0, buf[4], buf[5], buf[6]]);
                let name = self.name()?;
                let expiry_ms = u64::from_be_bytes(self.fixed::<8>(T_EXPIRY, buf.len())?);
                let (offset, payload) = self.tlv(T_PAYLOAD, buf.len())?;
                if payload.is_empty() {
                    return Err(CodecError::BadLength {
                        offset,
                        tlv_type: T_PAYLOAD,
                        len: 0,
                    });
                }
                if name.segment().is_none() {
                    return Err(CodecError::MissingSegment);
                }
                Message::ContentObject(ContentObject {
                    name,
                    payload_size: payload.len() as u32,
                    expiry_ms,
                    total_segments,
                })
            }
            other => return Err(CodecError::PacketType(other)),
        };
        if self.pos != buf.len() {
            let offset = self.pos;
            let tlv_type = if offset + 2 <= buf.len() {
                u16::from_be_bytes([buf[offset], buf[offset + 1]])
            } else {
                0xFFFF
            };
            return Err(CodecError::UnknownTlv { offset, tlv_type });
        }
        if declared != buf.len() {
            return Err(CodecError::LengthMismatch {
                declared,
                actual: buf.len(),
            });
        }
        Ok(msg)
    }
}
