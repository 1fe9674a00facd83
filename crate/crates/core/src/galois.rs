//! GF(2^8) and GF(2^16) arithmetic: scalar operations via log/antilog tables
//! and a bulk multiply-accumulate kernel for byte regions.
//!
//! Both fields use the generator g = 2 and the canonical reduction
//! polynomials 0x11D (w=8) and 0x1100B (w=16). w=16 symbols in byte regions
//! are little-endian pairs.

use crate::{stats, Error, Result};

/// A field element. Values must lie in `[0, 2^w)` for the field in use.
pub type Elem = u16;

/// Reduction polynomial for GF(2^8): x^8 + x^4 + x^3 + x^2 + 1.
pub const POLY_W8: u32 = 0x11D;
/// Reduction polynomial for GF(2^16): x^16 + x^12 + x^3 + x + 1.
pub const POLY_W16: u32 = 0x1100B;

/// GF(2^w) arithmetic context: width, polynomial, generator, and the
/// log/antilog tables backing all operations.
///
/// Immutable after construction; safe to share across threads.
pub struct Field {
    width: u32,
    poly: u32,
    generator: Elem,
    order: u32, // 2^w - 1, also the element value mask
    log: Vec<u16>,
    exp: Vec<u16>, // 2*order entries so log sums index without reduction
}

impl Field {
    /// Build the field for a supported width, verifying during table
    /// construction that g = 2 generates the full multiplicative group
    /// (which also proves the polynomial primitive, hence irreducible).
    pub fn new(width: u32) -> Result<Field> {
        let poly = match width {
            8 => POLY_W8,
            16 => POLY_W16,
            _ => return Err(Error::UnsupportedWidth(width)),
        };
        let order = (1u32 << width) - 1;
        let generator: Elem = 2;

        let mut log = vec![0u16; (order + 1) as usize];
        let mut exp = vec![0u16; 2 * order as usize];
        let mut seen = vec![false; (order + 1) as usize];
        let high_bit = 1u32 << width;

        let mut val: u32 = 1;
        for i in 0..order {
            if seen[val as usize] {
                return Err(Error::DegeneratePoints(format!(
                    "g=2 revisits element {val:#x} at exponent {i}; polynomial {poly:#x} is not primitive"
                )));
            }
            seen[val as usize] = true;
            exp[i as usize] = val as u16;
            exp[(i + order) as usize] = val as u16;
            log[val as usize] = i as u16;
            val <<= 1;
            if val & high_bit != 0 {
                val ^= poly;
            }
        }
        if val != 1 {
            return Err(Error::DegeneratePoints(format!(
                "g=2 has order != {order} under polynomial {poly:#x}"
            )));
        }

        Ok(Field {
            width,
            poly,
            generator,
            order,
            log,
            exp,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    /// Multiplicative group order, 2^w - 1.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Bytes per symbol in byte regions (1 for w=8, 2 for w=16).
    pub fn symbol_bytes(&self) -> usize {
        (self.width / 8) as usize
    }

    pub fn same_field(&self, other: &Field) -> bool {
        self.width == other.width && self.poly == other.poly
    }

    /// Addition (= subtraction) is XOR in characteristic 2.
    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!((a as u32) <= self.order && (b as u32) <= self.order);
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Multiplicative inverse; errors on zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        debug_assert!((a as u32) <= self.order);
        Ok(self.exp[(self.order - self.log[a as usize] as u32) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// g^e with the exponent reduced modulo 2^w - 1.
    #[inline]
    pub fn exp_g(&self, e: u64) -> Elem {
        self.exp[(e % self.order as u64) as usize]
    }

    /// dst <- dst + c * src over w-bit symbols.
    ///
    /// Bit-exact with the scalar loop of `mul`/`add`; c=0 leaves dst
    /// untouched and c=1 degrades to a plain XOR. The general case uses
    /// per-byte product tables (the split-table scheme for w=16).
    pub fn region_madd(&self, dst: &mut [u8], src: &[u8], c: Elem) -> Result<()> {
        if dst.len() != src.len() {
            return Err(Error::RegionLength {
                dst: dst.len(),
                src: src.len(),
            });
        }
        let symbol = self.symbol_bytes();
        if !dst.len().is_multiple_of(symbol) {
            return Err(Error::RegionAlignment {
                len: dst.len(),
                symbol,
            });
        }
        if c == 0 {
            return Ok(());
        }
        if c == 1 {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d ^= *s;
            }
            return Ok(());
        }
        stats::record_region_mul();
        match self.width {
            8 => {
                let mut table = [0u8; 256];
                let log_c = self.log[c as usize] as usize;
                for (x, t) in table.iter_mut().enumerate().skip(1) {
                    *t = self.exp[log_c + self.log[x] as usize] as u8;
                }
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d ^= table[*s as usize];
                }
            }
            16 => {
                // Split tables: c*x = c*(lo byte) + c*(hi byte << 8).
                let mut lo = [0u16; 256];
                let mut hi = [0u16; 256];
                for b in 1..256usize {
                    lo[b] = self.mul(c, b as Elem);
                    hi[b] = self.mul(c, (b << 8) as Elem);
                }
                for (d, s) in dst.chunks_exact_mut(2).zip(src.chunks_exact(2)) {
                    let v = u16::from_le_bytes([s[0], s[1]]);
                    let p = lo[(v & 0xFF) as usize] ^ hi[(v >> 8) as usize];
                    d[0] ^= (p & 0xFF) as u8;
                    d[1] ^= (p >> 8) as u8;
                }
            }
            _ => unreachable!("constructor rejects other widths"),
        }
        Ok(())
    }
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("width", &self.width)
            .field("poly", &format_args!("{:#x}", self.poly))
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other)
    }
}

impl Eq for Field {}
