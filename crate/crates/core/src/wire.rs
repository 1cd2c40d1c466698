//! Bit-exact wire framing for queries and answers.
//!
//! Frame layout, all integers big-endian, no compression:
//!
//! ```text
//! magic "PIR1" | role u8 | database u16 | record count u32 | records...
//! ```
//!
//! * role `0x01` = query. Each record is one equation: term count as `u16`,
//!   then per term the message index as `u16` and the bit index as `u32`.
//! * role `0x02` = answer. A single record: bit count as `u32`, then the bits
//!   packed MSB-first with the final partial byte zero-padded.
//!
//! Database and message indices are 1-based on the wire (0 is malformed);
//! bit indices are 0-based. Equation terms are already canonically ordered in
//! [`Equation`], so serialization round-trips structurally.

use thiserror::Error;

use crate::model::{AnswerString, BitRef, DatabaseQuery, Equation, ModelError};

pub const MAGIC: [u8; 4] = *b"PIR1";
pub const ROLE_QUERY: u8 = 0x01;
pub const ROLE_ANSWER: u8 = 0x02;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("truncated frame at byte {offset}: {needed} more bytes needed")]
    Truncated { offset: usize, needed: usize },
    #[error("bad magic at byte 0")]
    BadMagic,
    #[error("unknown role byte {role:#04x} at byte {offset}")]
    BadRole { role: u8, offset: usize },
    #[error("expected role {expected:#04x}, found {found:#04x} at byte {offset}")]
    WrongRole {
        expected: u8,
        found: u8,
        offset: usize,
    },
    #[error("zero index at byte {offset}: wire indices are 1-based")]
    ZeroIndex { offset: usize },
    #[error("{count} trailing bytes after frame end at byte {offset}")]
    Trailing { offset: usize, count: usize },
    #[error("value at byte {offset} does not fit the wire field: {what}")]
    FieldOverflow { offset: usize, what: &'static str },
    #[error("answer frame must hold exactly one record, found {count}")]
    AnswerRecordCount { count: u32 },
    #[error("nonzero padding bits in final byte at byte {offset}")]
    NonzeroPadding { offset: usize },
    #[error("invalid equation in record at byte {offset}: {source}")]
    InvalidEquation { offset: usize, source: ModelError },
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(role: u8, database: usize) -> Result<Self, WireError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&MAGIC);
        buf.push(role);
        let db = u16::try_from(database + 1).map_err(|_| WireError::FieldOverflow {
            offset: buf.len(),
            what: "database index",
        })?;
        buf.extend_from_slice(&db.to_be_bytes());
        Ok(Self { buf })
    }

    fn u16(&mut self, value: usize, what: &'static str) -> Result<(), WireError> {
        let v = u16::try_from(value).map_err(|_| WireError::FieldOverflow {
            offset: self.buf.len(),
            what,
        })?;
        self.buf.extend_from_slice(&v.to_be_bytes());
        Ok(())
    }

    fn u32(&mut self, value: usize, what: &'static str) -> Result<(), WireError> {
        let v = u32::try_from(value).map_err(|_| WireError::FieldOverflow {
            offset: self.buf.len(),
            what,
        })?;
        self.buf.extend_from_slice(&v.to_be_bytes());
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() - self.pos < len {
            return Err(WireError::Truncated {
                offset: self.pos,
                needed: len - (self.buf.len() - self.pos),
            });
        }
        let slice = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<(), WireError> {
        let remaining = self.buf.len() - self.pos;
        if remaining != 0 {
            return Err(WireError::Trailing {
                offset: self.pos,
                count: remaining,
            });
        }
        Ok(())
    }

    fn header(&mut self, expected_role: u8) -> Result<usize, WireError> {
        if self.take(4)? != MAGIC {
            return Err(WireError::BadMagic);
        }
        let role_offset = self.pos;
        let role = self.u8()?;
        if role != ROLE_QUERY && role != ROLE_ANSWER {
            return Err(WireError::BadRole {
                role,
                offset: role_offset,
            });
        }
        if role != expected_role {
            return Err(WireError::WrongRole {
                expected: expected_role,
                found: role,
                offset: role_offset,
            });
        }
        let db_offset = self.pos;
        let db = self.u16()?;
        if db == 0 {
            return Err(WireError::ZeroIndex { offset: db_offset });
        }
        Ok(db as usize - 1)
    }
}

pub fn serialize_query(query: &DatabaseQuery) -> Result<Vec<u8>, WireError> {
    let mut w = Writer::new(ROLE_QUERY, query.database)?;
    w.u32(query.equations.len(), "equation count")?;
    for eq in &query.equations {
        w.u16(eq.terms().len(), "term count")?;
        for term in eq.terms() {
            w.u16(term.message + 1, "message index")?;
            w.u32(term.bit, "bit index")?;
        }
    }
    Ok(w.buf)
}

pub fn deserialize_query(bytes: &[u8]) -> Result<DatabaseQuery, WireError> {
    let mut r = Reader::new(bytes);
    let database = r.header(ROLE_QUERY)?;
    let count = r.u32()?;
    let mut equations = Vec::with_capacity(count.min(1 << 16) as usize);
    for _ in 0..count {
        let record_offset = r.pos;
        let terms = r.u16()?;
        if terms == 0 {
            equations.push(Equation::zero());
            continue;
        }
        let mut refs = Vec::with_capacity(terms as usize);
        for _ in 0..terms {
            let msg_offset = r.pos;
            let message = r.u16()?;
            if message == 0 {
                return Err(WireError::ZeroIndex { offset: msg_offset });
            }
            let bit = r.u32()?;
            refs.push(BitRef::new(message as usize - 1, bit as usize));
        }
        let eq = Equation::new(refs).map_err(|source| WireError::InvalidEquation {
            offset: record_offset,
            source,
        })?;
        equations.push(eq);
    }
    r.finish()?;
    Ok(DatabaseQuery {
        database,
        equations,
    })
}

pub fn serialize_answer(answer: &AnswerString) -> Result<Vec<u8>, WireError> {
    let mut w = Writer::new(ROLE_ANSWER, answer.database)?;
    w.u32(1, "record count")?;
    w.u32(answer.bits.len(), "bit count")?;
    w.buf.extend_from_slice(&pack_bits(&answer.bits));
    Ok(w.buf)
}

pub fn deserialize_answer(bytes: &[u8]) -> Result<AnswerString, WireError> {
    let mut r = Reader::new(bytes);
    let database = r.header(ROLE_ANSWER)?;
    let records = r.u32()?;
    if records != 1 {
        return Err(WireError::AnswerRecordCount { count: records });
    }
    let bit_count = r.u32()? as usize;
    let payload_offset = r.pos;
    let payload = r.take(bit_count.div_ceil(8))?;
    let bits = unpack_bits(payload, bit_count);
    // Reject nonzero padding so every answer has exactly one encoding.
    if bit_count % 8 != 0 {
        let last = payload[payload.len() - 1];
        let mask = 0xffu8 >> (bit_count % 8);
        if last & mask != 0 {
            return Err(WireError::NonzeroPadding {
                offset: payload_offset + payload.len() - 1,
            });
        }
    }
    r.finish()?;
    Ok(AnswerString { database, bits })
}

/// MSB-first packing; the final partial byte is zero-padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &bit) in bits.iter().enumerate() {
        if bit {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    bytes
}

pub fn unpack_bits(bytes: &[u8], bit_count: usize) -> Vec<bool> {
    (0..bit_count)
        .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect()
}
