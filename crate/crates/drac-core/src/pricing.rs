//! Price-book lookup, quoting, invoicing and markdowns.
//!
//! All money is integer cents; nothing in this module touches floating
//! point. Window dimensions are bucketed up to even inch sizes before any
//! price lookup, matching how the shelf price list is keyed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::domain::{
    effective_dimensions, Controls, DomainError, EighthInches, MeasurementSet, ProductType,
    Vendor, AVERAGE_WINDOW,
};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Integer cents. Totals are exact sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn cents(self) -> i64 {
        self.0
    }
}

impl core::ops::Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl core::ops::Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl core::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}${}.{:02}", abs / 100, abs % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PricingError {
    /// SKU or bucket key absent from the price book.
    NoSuchEntry {
        sku: String,
        width_in: u32,
        height_in: u32,
    },
    DiscontinuedProduct {
        sku: String,
    },
    ProductUnavailable {
        sku: String,
    },
    TooManySelections {
        requested: usize,
    },
    NoSelections,
    NotAWindowProduct,
    EmptyOrder,
    MissingControls {
        sku: String,
    },
    InvalidDisposition,
}

impl fmt::Display for PricingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PricingError::NoSuchEntry {
                sku,
                width_in,
                height_in,
            } => write!(f, "no price entry for {sku} at {width_in}x{height_in}"),
            PricingError::DiscontinuedProduct { sku } => {
                write!(f, "product {sku} is discontinued")
            }
            PricingError::ProductUnavailable { sku } => {
                write!(f, "product {sku} is unavailable")
            }
            PricingError::TooManySelections { requested } => {
                write!(f, "{requested} selections requested, quote limit is 3")
            }
            PricingError::NoSelections => f.write_str("quote request has no selections"),
            PricingError::NotAWindowProduct => {
                f.write_str("wallpaper cannot be quoted by window size")
            }
            PricingError::EmptyOrder => f.write_str("order has no lines and no measurement fee"),
            PricingError::MissingControls { sku } => {
                write!(f, "blind line {sku} has no controls recorded")
            }
            PricingError::InvalidDisposition => {
                f.write_str("disposition not permitted for this item and reason")
            }
        }
    }
}

/// The smallest even inch count that covers the dimension. Exact even sizes
/// map to themselves, so the shelf keys (30x60 and friends) are fixed points.
pub fn price_bucket(dim: EighthInches) -> u32 {
    debug_assert!(dim.0 > 0);
    (dim.0 + 15) / 16 * 2
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceRow {
    pub sku: String,
    pub vendor: String,
    pub product: ProductType,
    pub width_in: u32,
    pub height_in: u32,
    pub price: Money,
    pub discontinued: bool,
}

/// Immutable after load; every SKU's vendor appears in the directory.
#[derive(Debug, Clone, Default)]
pub struct PriceBook {
    rows: Vec<PriceRow>,
    vendors: BTreeMap<String, Vendor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceBookError {
    pub line: u32,
    pub message: String,
}

impl fmt::Display for PriceBookError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "price book line {}: {}", self.line, self.message)
    }
}

pub const PRICE_BOOK_HEADER: &str =
    "sku,vendor,product_type,width_even_in,height_even_in,price_cents,discontinued";

impl PriceBook {
    /// Parse the CSV form. The header row is mandatory; blank lines and `#`
    /// comments are skipped.
    pub fn parse_csv(text: &str) -> Result<PriceBook, PriceBookError> {
        let err = |line: u32, message: String| PriceBookError { line, message };
        let mut rows: Vec<PriceRow> = Vec::new();
        let mut header_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx as u32 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != PRICE_BOOK_HEADER {
                    return Err(err(
                        lineno,
                        format!("expected header `{PRICE_BOOK_HEADER}`"),
                    ));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(err(
                    lineno,
                    format!("expected 7 fields, found {}", fields.len()),
                ));
            }
            let product = ProductType::from_token(fields[2]).ok_or_else(|| {
                err(lineno, format!("unknown product type `{}`", fields[2]))
            })?;
            let width_in: u32 = fields[3]
                .parse()
                .map_err(|_| err(lineno, format!("bad width `{}`", fields[3])))?;
            let height_in: u32 = fields[4]
                .parse()
                .map_err(|_| err(lineno, format!("bad height `{}`", fields[4])))?;
            if width_in == 0 || width_in % 2 != 0 || height_in == 0 || height_in % 2 != 0 {
                return Err(err(
                    lineno,
                    "bucket dimensions must be positive even inches".to_string(),
                ));
            }
            let cents: i64 = fields[5]
                .parse()
                .map_err(|_| err(lineno, format!("bad price `{}`", fields[5])))?;
            if cents < 0 {
                return Err(err(lineno, "price must be non-negative".to_string()));
            }
            let discontinued = match fields[6] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(err(
                        lineno,
                        format!("discontinued flag must be 0 or 1, found `{other}`"),
                    ))
                }
            };
            let row = PriceRow {
                sku: fields[0].to_string(),
                vendor: fields[1].to_string(),
                product,
                width_in,
                height_in,
                price: Money(cents),
                discontinued,
            };
            if fields[0].is_empty() || fields[1].is_empty() {
                return Err(err(lineno, "sku and vendor must be non-empty".to_string()));
            }
            if let Some(prev) = rows.iter().find(|r| r.sku == row.sku) {
                if prev.vendor != row.vendor || prev.product != row.product {
                    return Err(err(
                        lineno,
                        format!("sku {} remaps vendor or product type", row.sku),
                    ));
                }
                if prev.width_in == row.width_in && prev.height_in == row.height_in {
                    return Err(err(
                        lineno,
                        format!(
                            "duplicate entry for {} at {}x{}",
                            row.sku, row.width_in, row.height_in
                        ),
                    ));
                }
            }
            rows.push(row);
        }
        if !header_seen {
            return Err(err(1, "price book is empty".to_string()));
        }
        rows.sort_by(|a, b| {
            (&a.sku, a.width_in, a.height_in).cmp(&(&b.sku, b.width_in, b.height_in))
        });
        let mut vendors = BTreeMap::new();
        for row in &rows {
            vendors
                .entry(row.vendor.clone())
                .or_insert_with(|| Vendor::new(row.vendor.clone()));
        }
        Ok(PriceBook { rows, vendors })
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }

    pub fn vendor(&self, name: &str) -> Option<&Vendor> {
        self.vendors.get(name)
    }

    /// Record a vendor lead-time interval in days for one of its products.
    pub fn set_vendor_lead(&mut self, vendor: &str, product: ProductType, days: (u32, u32)) {
        if let Some(v) = self.vendors.get_mut(vendor) {
            v.lead_time_days.insert(product, days);
        }
    }

    fn sku_rows(&self, sku: &str) -> &[PriceRow] {
        let start = self.rows.partition_point(|r| r.sku.as_str() < sku);
        let end = self.rows.partition_point(|r| r.sku.as_str() <= sku);
        &self.rows[start..end]
    }

    pub fn sku_product(&self, sku: &str) -> Option<ProductType> {
        self.sku_rows(sku).first().map(|r| r.product)
    }

    pub fn sku_vendor(&self, sku: &str) -> Option<&str> {
        self.sku_rows(sku).first().map(|r| r.vendor.as_str())
    }

    /// First listed SKU carrying `product`, skipping discontinued ones.
    pub fn sku_for_product(&self, product: ProductType) -> Option<&str> {
        self.rows
            .iter()
            .find(|r| r.product == product && !r.discontinued)
            .map(|r| r.sku.as_str())
    }
}

/// Price at (sku, bucketed width, bucketed height). A discontinued SKU fails
/// regardless of dimensions.
pub fn lookup_price(
    book: &PriceBook,
    sku: &str,
    dims: (EighthInches, EighthInches),
) -> Result<Money, PricingError> {
    let rows = book.sku_rows(sku);
    if rows.iter().any(|r| r.discontinued) {
        return Err(PricingError::DiscontinuedProduct {
            sku: sku.to_string(),
        });
    }
    let (w, h) = (price_bucket(dims.0), price_bucket(dims.1));
    rows.iter()
        .find(|r| r.width_in == w && r.height_in == h)
        .map(|r| r.price)
        .ok_or(PricingError::NoSuchEntry {
            sku: sku.to_string(),
            width_in: w,
            height_in: h,
        })
}

/// One quote selection: a concrete SKU or a product type resolved against
/// the book.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Sku(String),
    Product(ProductType),
}

/// The default trio offered when the customer names no products.
pub fn default_selection_trio() -> [Selection; 3] {
    [
        Selection::Product(ProductType::RealWood),
        Selection::Product(ProductType::Cellular),
        Selection::Product(ProductType::FauxWood),
    ]
}

#[derive(Debug, Clone, Default)]
pub struct QuoteRequest {
    pub selections: Vec<Selection>,
    /// Empty means average-window mode: a single 35 x 64 inch window.
    pub measurements: Vec<MeasurementSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuoteLine {
    pub sku: String,
    pub product: ProductType,
    /// Per-window effective dimensions and their looked-up prices.
    pub windows: Vec<((EighthInches, EighthInches), Money)>,
    pub line_total: Money,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quote {
    pub lines: Vec<QuoteLine>,
    /// Simulation minutes at creation.
    pub created_at: u64,
}

impl Quote {
    pub fn total(&self) -> Money {
        self.lines.iter().map(|l| l.line_total).sum()
    }
}

/// Build a quote of one line per selection, capped at three lines.
/// `available` answers per-SKU availability as confirmed with the vendor.
pub fn generate_quote(
    book: &PriceBook,
    request: &QuoteRequest,
    available: impl Fn(&str) -> bool,
    created_at: u64,
) -> Result<Quote, PricingError> {
    if request.selections.is_empty() {
        return Err(PricingError::NoSelections);
    }
    if request.selections.len() > 3 {
        return Err(PricingError::TooManySelections {
            requested: request.selections.len(),
        });
    }
    let mut lines = Vec::new();
    for selection in &request.selections {
        let sku: String = match selection {
            Selection::Sku(s) => s.clone(),
            Selection::Product(p) => book
                .sku_for_product(*p)
                .ok_or(PricingError::ProductUnavailable {
                    sku: p.token().to_string(),
                })?
                .to_string(),
        };
        if !available(&sku) {
            return Err(PricingError::ProductUnavailable { sku });
        }
        let product = book.sku_product(&sku).ok_or(PricingError::NoSuchEntry {
            sku: sku.clone(),
            width_in: 0,
            height_in: 0,
        })?;
        if !product.is_window_product() {
            return Err(PricingError::NotAWindowProduct);
        }
        let mut windows = Vec::new();
        if request.measurements.is_empty() {
            let price = lookup_price(book, &sku, AVERAGE_WINDOW)?;
            windows.push((AVERAGE_WINDOW, price));
        } else {
            for m in &request.measurements {
                let dims = effective_dimensions(m, product).map_err(|e| match e {
                    DomainError::NotAWindowProduct => PricingError::NotAWindowProduct,
                    _ => PricingError::NoSelections,
                })?;
                let price = lookup_price(book, &sku, dims)?;
                windows.push((dims, price));
            }
        }
        let line_total = windows.iter().map(|(_, p)| *p).sum();
        lines.push(QuoteLine {
            sku,
            product,
            windows,
            line_total,
        });
    }
    Ok(Quote { lines, created_at })
}

pub const MEASUREMENT_FEE: Money = Money(2500);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvoiceLineInput {
    pub sku: String,
    pub product: ProductType,
    pub dims: Option<(EighthInches, EighthInches)>,
    pub controls: Option<Controls>,
    pub unit_price: Money,
    /// Vendor lead-time override in days, when the vendor record has one.
    pub vendor_lead_days: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvoiceOrder {
    pub id: u64,
    pub seed: u64,
    pub lines: Vec<InvoiceLineInput>,
    pub measurement_service_purchased: bool,
    pub customer_buys_product: bool,
    pub install_requested: bool,
    pub delivery_fee: Money,
    pub discount_percent: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct InvoiceLine {
    pub sku: String,
    pub dims: Option<(EighthInches, EighthInches)>,
    pub controls: Option<Controls>,
    pub unit_price: Money,
}

/// The staged-for-register document the cashier scans.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Invoice {
    pub lines: Vec<InvoiceLine>,
    pub product_subtotal: Money,
    pub discount_percent: Option<u32>,
    pub discount_amount: Money,
    pub measurement_fee: Money,
    pub measurement_fee_credited: bool,
    pub delivery_fee: Money,
    pub total: Money,
    pub upc: String,
    /// Days from issue, inclusive interval.
    pub delivery_window_days: (u32, u32),
}

/// FNV-1a 64-bit.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn upc_for(order_id: u64, seed: u64) -> String {
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&order_id.to_le_bytes());
    bytes[8..].copy_from_slice(&seed.to_le_bytes());
    format!("{:012}", fnv64(&bytes) % 1_000_000_000_000)
}

pub const DELIVERY_WINDOW_DAYS: (u32, u32) = (14, 21);
pub const DELIVERY_WINDOW_WITH_INSTALL_DAYS: (u32, u32) = (21, 28);

/// Stage an order for the register. Discounts touch product lines only; the
/// measurement fee is credited back exactly when the customer buys product.
pub fn generate_invoice(order: &InvoiceOrder) -> Result<Invoice, PricingError> {
    if order.lines.is_empty() && !order.measurement_service_purchased {
        return Err(PricingError::EmptyOrder);
    }
    for line in &order.lines {
        if line.product.is_window_product() && line.controls.is_none() {
            return Err(PricingError::MissingControls {
                sku: line.sku.clone(),
            });
        }
    }
    let product_subtotal: Money = order.lines.iter().map(|l| l.unit_price).sum();
    let percent = order.discount_percent.unwrap_or(0).min(100) as i64;
    let discounted = Money(product_subtotal.0 * (100 - percent) / 100);
    let discount_amount = product_subtotal - discounted;
    let measurement_fee = if order.measurement_service_purchased {
        MEASUREMENT_FEE
    } else {
        Money::ZERO
    };
    let credited = order.measurement_service_purchased && order.customer_buys_product;
    let credit = if credited { MEASUREMENT_FEE } else { Money::ZERO };
    let total = discounted + measurement_fee + order.delivery_fee - credit;

    let leads: Vec<(u32, u32)> = order.lines.iter().filter_map(|l| l.vendor_lead_days).collect();
    let delivery_window_days = if leads.is_empty() {
        if order.install_requested {
            DELIVERY_WINDOW_WITH_INSTALL_DAYS
        } else {
            DELIVERY_WINDOW_DAYS
        }
    } else {
        // vendor lead times replace the store default; the slowest line bounds
        // the whole order
        (
            leads.iter().map(|l| l.0).max().unwrap(),
            leads.iter().map(|l| l.1).max().unwrap(),
        )
    };

    Ok(Invoice {
        lines: order
            .lines
            .iter()
            .map(|l| InvoiceLine {
                sku: l.sku.clone(),
                dims: l.dims,
                controls: l.controls,
                unit_price: l.unit_price,
            })
            .collect(),
        product_subtotal,
        discount_percent: order.discount_percent,
        discount_amount,
        measurement_fee,
        measurement_fee_credited: credited,
        delivery_fee: order.delivery_fee,
        total,
        upc: upc_for(order.id, order.seed),
        delivery_window_days,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum MarkdownReason {
    Returned,
    Damaged,
    Lost,
    Stolen,
    /// Percent off the recorded price.
    Discount(u32),
}

impl fmt::Display for MarkdownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkdownReason::Returned => f.write_str("returned"),
            MarkdownReason::Damaged => f.write_str("damaged"),
            MarkdownReason::Lost => f.write_str("lost"),
            MarkdownReason::Stolen => f.write_str("stolen"),
            MarkdownReason::Discount(p) => write!(f, "discount {p}%"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Disposition {
    BackToShelf,
    Rtv,
    Trash,
}

impl fmt::Display for Disposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disposition::BackToShelf => "back_to_shelf",
            Disposition::Rtv => "rtv",
            Disposition::Trash => "trash",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkdownItem {
    pub sku: String,
    pub original_price: Money,
    /// Special orders go back to the vendor; in-stock items stay in the store.
    pub special_order: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MarkdownRecord {
    pub sku: String,
    pub reason: MarkdownReason,
    pub original_price: Money,
    pub marked_price: Money,
    pub disposition: Disposition,
    pub timestamp: u64,
}

/// Mark an item down. Returned, damaged, lost and stolen goods go to zero;
/// the disposition must fit the item and reason.
pub fn apply_markdown(
    item: &MarkdownItem,
    reason: MarkdownReason,
    disposition: Disposition,
    timestamp: u64,
) -> Result<MarkdownRecord, PricingError> {
    let allowed = match reason {
        MarkdownReason::Returned => {
            if item.special_order {
                disposition == Disposition::Rtv
            } else {
                disposition == Disposition::BackToShelf
            }
        }
        MarkdownReason::Damaged | MarkdownReason::Lost | MarkdownReason::Stolen => {
            disposition == Disposition::Trash
        }
        MarkdownReason::Discount(_) => disposition == Disposition::BackToShelf,
    };
    if !allowed {
        return Err(PricingError::InvalidDisposition);
    }
    let marked_price = match reason {
        MarkdownReason::Discount(p) => {
            let p = p.min(100) as i64;
            Money(item.original_price.0 * (100 - p) / 100)
        }
        _ => Money::ZERO,
    };
    Ok(MarkdownRecord {
        sku: item.sku.clone(),
        reason,
        original_price: item.original_price,
        marked_price,
        disposition,
        timestamp,
    })
}
