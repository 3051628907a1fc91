//! Domain vocabulary: measurements in eighths of an inch, product types,
//! control schemes, vendors and customers, plus the measuring and cutting
//! rules the store works by.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Windows are measured to the nearest eighth of an inch; all dimension
/// arithmetic is integer arithmetic in these units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EighthInches(pub u32);

impl EighthInches {
    pub fn from_whole_inches(inches: u32) -> Self {
        EighthInches(inches * 8)
    }

    pub fn eighths(self) -> u32 {
        self.0
    }
}

impl fmt::Display for EighthInches {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 8;
        let rem = self.0 % 8;
        if rem == 0 {
            write!(f, "{whole}")
        } else {
            // eighths expand to exact three-digit decimals
            const FRACTIONS: [&str; 8] =
                ["", ".125", ".25", ".375", ".5", ".625", ".75", ".875"];
            write!(f, "{whole}{}", FRACTIONS[rem as usize])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasurementError {
    /// Finer than eighth-inch granularity (e.g. "30.0625").
    Granularity,
    /// Zero or negative dimension.
    NonPositive,
    /// Not a decimal number at all.
    Malformed,
}

impl fmt::Display for MeasurementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementError::Granularity => {
                "measurement is finer than eighth-inch granularity"
            }
            MeasurementError::NonPositive => "measurement must be positive",
            MeasurementError::Malformed => "measurement is not a decimal number",
        })
    }
}

/// Parse a decimal inch string ("35.125") into eighths. The fraction must
/// land exactly on an eighth; zero and negatives are rejected.
pub fn parse_eighth_inches(text: &str) -> Result<EighthInches, MeasurementError> {
    let t = text.trim();
    if t.starts_with('-') {
        // reject as a value problem, not a syntax problem, when the rest parses
        let rest = &t[1..];
        return if parse_unsigned(rest).is_ok() {
            Err(MeasurementError::NonPositive)
        } else {
            Err(MeasurementError::Malformed)
        };
    }
    let v = parse_unsigned(t)?;
    if v == 0 {
        return Err(MeasurementError::NonPositive);
    }
    u32::try_from(v).map(EighthInches).map_err(|_| MeasurementError::Malformed)
}

fn parse_unsigned(t: &str) -> Result<u64, MeasurementError> {
    if t.is_empty() {
        return Err(MeasurementError::Malformed);
    }
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (t, None),
    };
    if !int_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(MeasurementError::Malformed);
    }
    let whole: u64 = if int_part.is_empty() {
        if frac_part.is_none() {
            return Err(MeasurementError::Malformed);
        }
        0
    } else {
        int_part.parse().map_err(|_| MeasurementError::Malformed)?
    };
    let mut eighths = whole.checked_mul(8).ok_or(MeasurementError::Malformed)?;
    if let Some(frac) = frac_part {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 6 {
            return Err(MeasurementError::Malformed);
        }
        let digits: u64 = frac.parse().map_err(|_| MeasurementError::Malformed)?;
        let scale = 10u64.pow(frac.len() as u32);
        if (digits * 8) % scale != 0 {
            return Err(MeasurementError::Granularity);
        }
        eighths += digits * 8 / scale;
    }
    Ok(eighths)
}

/// Parse a width/height pair as entered at the terminal.
pub fn validate_measurement_text(
    width: &str,
    height: &str,
) -> Result<(EighthInches, EighthInches), MeasurementError> {
    Ok((parse_eighth_inches(width)?, parse_eighth_inches(height)?))
}

/// The measuring rule: three width readings (top, middle, bottom) and three
/// height readings (left, middle, right), all positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeasurementSet {
    pub widths: [EighthInches; 3],
    pub heights: [EighthInches; 3],
}

impl MeasurementSet {
    pub fn new(
        widths: [EighthInches; 3],
        heights: [EighthInches; 3],
    ) -> Result<Self, MeasurementError> {
        if widths.iter().chain(heights.iter()).any(|d| d.0 == 0) {
            return Err(MeasurementError::NonPositive);
        }
        Ok(MeasurementSet { widths, heights })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Material {
    Aluminum,
    Vinyl,
}

/// Product lines carried by the design center. Horizontal blinds carry their
/// slat material; that is what decides whether stock can be cut down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ProductType {
    Horizontal1In(Material),
    Horizontal2In(Material),
    Cellular,
    Vertical,
    RealWood,
    FauxWood,
    WallpaperSolidVinyl,
    WallpaperVinylCoated,
    WallpaperEmbossed,
}

impl ProductType {
    pub fn is_wallpaper(self) -> bool {
        matches!(
            self,
            ProductType::WallpaperSolidVinyl
                | ProductType::WallpaperVinylCoated
                | ProductType::WallpaperEmbossed
        )
    }

    /// Window products are measured and priced by bucketed dimensions.
    pub fn is_window_product(self) -> bool {
        !self.is_wallpaper()
    }

    pub fn token(self) -> &'static str {
        match self {
            ProductType::Horizontal1In(Material::Aluminum) => "horizontal_1in_aluminum",
            ProductType::Horizontal1In(Material::Vinyl) => "horizontal_1in_vinyl",
            ProductType::Horizontal2In(Material::Aluminum) => "horizontal_2in_aluminum",
            ProductType::Horizontal2In(Material::Vinyl) => "horizontal_2in_vinyl",
            ProductType::Cellular => "cellular",
            ProductType::Vertical => "vertical",
            ProductType::RealWood => "real_wood",
            ProductType::FauxWood => "faux_wood",
            ProductType::WallpaperSolidVinyl => "wallpaper_solid_vinyl",
            ProductType::WallpaperVinylCoated => "wallpaper_vinyl_coated",
            ProductType::WallpaperEmbossed => "wallpaper_embossed",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Some(match token {
            "horizontal_1in_aluminum" => ProductType::Horizontal1In(Material::Aluminum),
            "horizontal_1in_vinyl" => ProductType::Horizontal1In(Material::Vinyl),
            "horizontal_2in_aluminum" => ProductType::Horizontal2In(Material::Aluminum),
            "horizontal_2in_vinyl" => ProductType::Horizontal2In(Material::Vinyl),
            "cellular" => ProductType::Cellular,
            "vertical" => ProductType::Vertical,
            "real_wood" => ProductType::RealWood,
            "faux_wood" => ProductType::FauxWood,
            "wallpaper_solid_vinyl" => ProductType::WallpaperSolidVinyl,
            "wallpaper_vinyl_coated" => ProductType::WallpaperVinylCoated,
            "wallpaper_embossed" => ProductType::WallpaperEmbossed,
            _ => return None,
        })
    }
}

impl fmt::Display for ProductType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Stack {
    Left,
    Right,
    Split,
}

/// Control layout per product family. Vertical wands ride on the same side
/// as the stack, enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Controls {
    Horizontal2In {
        tilt_cord: Side,
        lift_cord: Side,
        orientation_standard: bool,
    },
    Horizontal1In {
        tilt_wand: Side,
        lift: Side,
        orientation_standard: bool,
    },
    Cellular {
        lift_cord: Side,
        orientation_standard: bool,
    },
    Vertical {
        stack: Stack,
        wand: Side,
        orientation_standard: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainError {
    /// Wallpaper has no window dimensions.
    NotAWindowProduct,
    /// Opening area exceeds wall area.
    NegativeNetArea,
    /// Vertical wand not on the stack side.
    ControlsMismatch,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainError::NotAWindowProduct => "not a window product",
            DomainError::NegativeNetArea => "openings exceed wall area",
            DomainError::ControlsMismatch => "vertical wand must sit on the stack side",
        })
    }
}

impl Controls {
    pub fn vertical(stack: Stack, wand: Side, orientation_standard: bool) -> Result<Self, DomainError> {
        let ok = match stack {
            Stack::Left => wand == Side::Left,
            Stack::Right => wand == Side::Right,
            Stack::Split => true,
        };
        if !ok {
            return Err(DomainError::ControlsMismatch);
        }
        Ok(Controls::Vertical {
            stack,
            wand,
            orientation_standard,
        })
    }

    /// House-standard layout for a product, `None` for wallpaper.
    pub fn standard_for(product: ProductType) -> Option<Controls> {
        match product {
            ProductType::Horizontal2In(_) | ProductType::RealWood | ProductType::FauxWood => {
                Some(Controls::Horizontal2In {
                    tilt_cord: Side::Left,
                    lift_cord: Side::Right,
                    orientation_standard: true,
                })
            }
            ProductType::Horizontal1In(_) => Some(Controls::Horizontal1In {
                tilt_wand: Side::Left,
                lift: Side::Right,
                orientation_standard: true,
            }),
            ProductType::Cellular => Some(Controls::Cellular {
                lift_cord: Side::Right,
                orientation_standard: true,
            }),
            ProductType::Vertical => Some(Controls::Vertical {
                stack: Stack::Right,
                wand: Side::Right,
                orientation_standard: true,
            }),
            _ => None,
        }
    }

    /// Mirror of the standard layout, flagged as reverse orientation.
    pub fn reverse_for(product: ProductType) -> Option<Controls> {
        Some(match Controls::standard_for(product)? {
            Controls::Horizontal2In { .. } => Controls::Horizontal2In {
                tilt_cord: Side::Right,
                lift_cord: Side::Left,
                orientation_standard: false,
            },
            Controls::Horizontal1In { .. } => Controls::Horizontal1In {
                tilt_wand: Side::Right,
                lift: Side::Left,
                orientation_standard: false,
            },
            Controls::Cellular { .. } => Controls::Cellular {
                lift_cord: Side::Left,
                orientation_standard: false,
            },
            Controls::Vertical { .. } => Controls::Vertical {
                stack: Stack::Left,
                wand: Side::Left,
                orientation_standard: false,
            },
        })
    }
}

/// Vendor directory entry. Lead times, when known, are day intervals per
/// product type and override the store's default delivery windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vendor {
    pub name: String,
    pub lead_time_days: BTreeMap<ProductType, (u32, u32)>,
}

impl Vendor {
    pub fn new(name: impl Into<String>) -> Self {
        Vendor {
            name: name.into(),
            lead_time_days: BTreeMap::new(),
        }
    }
}

/// Customer record; the phone number is the lookup key.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CustomerInfo {
    pub name: String,
    pub phone: String,
    pub delivery_address: String,
    pub installation_address: String,
}

impl CustomerInfo {
    pub fn new(name: impl Into<String>, phone: impl Into<String>) -> Self {
        CustomerInfo {
            name: name.into(),
            phone: phone.into(),
            delivery_address: String::new(),
            installation_address: String::new(),
        }
    }
}

/// Cuttable stock is Bali 1-inch horizontal only.
pub const CUT_BRAND: &str = "Bali";
/// Minutes to cut one blind down to size.
pub const CUT_MINUTES_PER_BLIND: u32 = 4;
/// Slack under which a stock blind already fits (quarter inch).
pub const FIT_TOLERANCE_EIGHTHS: u32 = 2;
/// Coverage of one wallpaper roll.
pub const SQ_FT_PER_ROLL: f64 = 56.0;
/// The quoting shortcut when windows are unmeasured: 35in x 64in.
pub const AVERAGE_WINDOW: (EighthInches, EighthInches) =
    (EighthInches(280), EighthInches(512));

/// Reduce six readings to the ordering dimensions.
///
/// Horizontal-rule products (horizontals, cellular, wood) take the smallest
/// width and the longest height so the blind covers the opening everywhere.
/// Verticals hang from the top: top width and the smallest height.
pub fn effective_dimensions(
    m: &MeasurementSet,
    product: ProductType,
) -> Result<(EighthInches, EighthInches), DomainError> {
    if !product.is_window_product() {
        return Err(DomainError::NotAWindowProduct);
    }
    let min_w = *m.widths.iter().min().expect("three widths");
    let max_h = *m.heights.iter().max().expect("three heights");
    let min_h = *m.heights.iter().min().expect("three heights");
    Ok(match product {
        ProductType::Vertical => (m.widths[0], min_h),
        _ => (min_w, max_h),
    })
}

/// Rolls to order: net wall area at 56 square feet per roll, rounded up.
pub fn wallpaper_rolls_needed(
    wall_sq_ft: f64,
    opening_sq_ft: f64,
) -> Result<u32, DomainError> {
    if opening_sq_ft > wall_sq_ft {
        return Err(DomainError::NegativeNetArea);
    }
    let net = wall_sq_ft - opening_sq_ft;
    if net <= 0.0 {
        return Ok(0);
    }
    let q = net / SQ_FT_PER_ROLL;
    let t = q as u32;
    Ok(if (t as f64) < q { t + 1 } else { t })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StockBlind {
    pub brand: String,
    pub product: ProductType,
    pub width: EighthInches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutAssessment {
    pub feasible: bool,
    /// Zero when infeasible or when the stock width already fits within
    /// [`FIT_TOLERANCE_EIGHTHS`].
    pub cut_minutes: u32,
}

/// Whether stock blinds can be cut down to `target_width`, and the labor if
/// so. `count` is the number of blinds (at least 1).
pub fn cut_feasibility(stock: &StockBlind, target_width: EighthInches, count: u32) -> CutAssessment {
    debug_assert!(count >= 1);
    let feasible = stock.brand == CUT_BRAND
        && matches!(stock.product, ProductType::Horizontal1In(_))
        && stock.width >= target_width;
    if !feasible {
        return CutAssessment {
            feasible: false,
            cut_minutes: 0,
        };
    }
    let slack = stock.width.0 - target_width.0;
    CutAssessment {
        feasible: true,
        cut_minutes: if slack <= FIT_TOLERANCE_EIGHTHS {
            0
        } else {
            CUT_MINUTES_PER_BLIND * count
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn e(v: u32) -> EighthInches {
        EighthInches(v)
    }

    fn sample_set() -> MeasurementSet {
        MeasurementSet::new(
            [e(240), e(239), e(241)],
            [e(512), e(514), e(513)],
        )
        .unwrap()
    }

    #[test]
    fn horizontal_takes_narrowest_width_longest_height() {
        let dims =
            effective_dimensions(&sample_set(), ProductType::Horizontal1In(Material::Aluminum))
                .unwrap();
        assert_eq!(dims, (e(239), e(514)));
        // cellular and the wood lines follow the same rule
        assert_eq!(
            effective_dimensions(&sample_set(), ProductType::Cellular).unwrap(),
            (e(239), e(514))
        );
        assert_eq!(
            effective_dimensions(&sample_set(), ProductType::RealWood).unwrap(),
            (e(239), e(514))
        );
    }

    #[test]
    fn vertical_takes_top_width_smallest_height() {
        let dims = effective_dimensions(&sample_set(), ProductType::Vertical).unwrap();
        assert_eq!(dims, (e(240), e(512)));
    }

    #[test]
    fn wallpaper_has_no_window_dimensions() {
        assert_eq!(
            effective_dimensions(&sample_set(), ProductType::WallpaperEmbossed),
            Err(DomainError::NotAWindowProduct)
        );
    }

    #[test]
    fn rolls_examples() {
        assert_eq!(wallpaper_rolls_needed(200.0, 0.0), Ok(4));
        assert_eq!(wallpaper_rolls_needed(112.0, 0.0), Ok(2));
        assert_eq!(wallpaper_rolls_needed(60.0, 10.0), Ok(1));
        assert_eq!(wallpaper_rolls_needed(50.0, 50.0), Ok(0));
        assert_eq!(
            wallpaper_rolls_needed(100.0, 120.0),
            Err(DomainError::NegativeNetArea)
        );
    }

    proptest! {
        #[test]
        fn rolls_cover_exactly(wall in 0.0..20_000.0f64, openings in 0.0..20_000.0f64) {
            prop_assume!(openings <= wall);
            let rolls = wallpaper_rolls_needed(wall, openings).unwrap();
            let net = wall - openings;
            prop_assert!(rolls as f64 * SQ_FT_PER_ROLL >= net);
            if rolls > 0 {
                prop_assert!((rolls - 1) as f64 * SQ_FT_PER_ROLL < net);
            }
        }
    }

    #[test]
    fn cut_rules() {
        let bali = StockBlind {
            brand: "Bali".to_string(),
            product: ProductType::Horizontal1In(Material::Vinyl),
            width: e(250),
        };
        let wide_cut = cut_feasibility(&bali, e(240), 3);
        assert!(wide_cut.feasible);
        assert_eq!(wide_cut.cut_minutes, 12);

        // within the quarter-inch tolerance nothing needs cutting
        let snug = cut_feasibility(&bali, e(248), 3);
        assert!(snug.feasible);
        assert_eq!(snug.cut_minutes, 0);
        let exact = cut_feasibility(&bali, e(250), 1);
        assert_eq!(exact.cut_minutes, 0);

        // too narrow, wrong brand, wrong product
        assert!(!cut_feasibility(&bali, e(260), 1).feasible);
        let levolor = StockBlind {
            brand: "Levolor".to_string(),
            ..bali.clone()
        };
        assert!(!cut_feasibility(&levolor, e(240), 1).feasible);
        let two_inch = StockBlind {
            product: ProductType::Horizontal2In(Material::Vinyl),
            ..bali.clone()
        };
        assert!(!cut_feasibility(&two_inch, e(240), 1).feasible);
    }

    #[test]
    fn measurement_text_examples() {
        assert_eq!(parse_eighth_inches("35.125"), Ok(e(281)));
        assert_eq!(parse_eighth_inches("60"), Ok(e(480)));
        assert_eq!(parse_eighth_inches(".5"), Ok(e(4)));
        assert_eq!(
            parse_eighth_inches("30.0625"),
            Err(MeasurementError::Granularity)
        );
        assert_eq!(parse_eighth_inches("0"), Err(MeasurementError::NonPositive));
        assert_eq!(parse_eighth_inches("-3"), Err(MeasurementError::NonPositive));
        assert_eq!(parse_eighth_inches("abc"), Err(MeasurementError::Malformed));
        assert_eq!(parse_eighth_inches(""), Err(MeasurementError::Malformed));
        assert_eq!(
            validate_measurement_text("35.125", "64"),
            Ok((e(281), e(512)))
        );
    }

    #[test]
    fn display_parse_round_trip_all_eighths() {
        for v in 1..4096u32 {
            let text = e(v).to_string();
            assert_eq!(parse_eighth_inches(&text), Ok(e(v)), "value {v} as {text}");
        }
    }

    #[test]
    fn measurement_set_rejects_zero() {
        assert_eq!(
            MeasurementSet::new([e(0), e(1), e(1)], [e(1), e(1), e(1)]),
            Err(MeasurementError::NonPositive)
        );
    }

    #[test]
    fn vertical_controls_must_match_stack() {
        assert!(Controls::vertical(Stack::Left, Side::Left, true).is_ok());
        assert_eq!(
            Controls::vertical(Stack::Left, Side::Right, true),
            Err(DomainError::ControlsMismatch)
        );
        assert!(Controls::vertical(Stack::Split, Side::Right, true).is_ok());
    }

    #[test]
    fn standard_controls_exist_for_window_products() {
        for p in [
            ProductType::Horizontal1In(Material::Aluminum),
            ProductType::Horizontal2In(Material::Vinyl),
            ProductType::Cellular,
            ProductType::Vertical,
            ProductType::RealWood,
            ProductType::FauxWood,
        ] {
            assert!(Controls::standard_for(p).is_some());
            assert!(Controls::reverse_for(p).is_some());
        }
        assert!(Controls::standard_for(ProductType::WallpaperEmbossed).is_none());
    }

    #[test]
    fn product_tokens_round_trip() {
        for p in [
            ProductType::Horizontal1In(Material::Aluminum),
            ProductType::Horizontal1In(Material::Vinyl),
            ProductType::Horizontal2In(Material::Aluminum),
            ProductType::Horizontal2In(Material::Vinyl),
            ProductType::Cellular,
            ProductType::Vertical,
            ProductType::RealWood,
            ProductType::FauxWood,
            ProductType::WallpaperSolidVinyl,
            ProductType::WallpaperVinylCoated,
            ProductType::WallpaperEmbossed,
        ] {
            assert_eq!(ProductType::from_token(p.token()), Some(p));
        }
    }
}
