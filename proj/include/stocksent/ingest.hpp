#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stocksent/calendar.hpp"

namespace stocksent {

/// One end-of-day adjusted close for one company.
struct PriceBar {
    std::string company;
    Date date;
    double adjusted_close = 0.0;

    bool operator==(const PriceBar&) const = default;
};

/// Binary up/down movement for a trading day: up = 1 iff today's close
/// strictly exceeds the previous trading day's close.
struct MovementLabel {
    std::string company;
    Date date;
    int up = 0;

    bool operator==(const MovementLabel&) const = default;
};

/// One raw microblog post.
struct RawMessage {
    std::string id;
    Instant timestamp_utc = 0;
    std::string ticker;
    std::string body;

    bool operator==(const RawMessage&) const = default;
};

enum class TableFormat { csv, jsonl };

/// Picks csv/jsonl from the file extension; anything else is a ConfigError.
TableFormat format_from_extension(const std::filesystem::path& p);

// Loaders. Output is sorted (prices by company/date, messages by timestamp
// with id as tie-break); duplicate keys are rejected.
std::vector<PriceBar> load_prices(const std::filesystem::path& p, TableFormat fmt);
std::vector<RawMessage> load_messages(const std::filesystem::path& p, TableFormat fmt);

// Writers, inverse of the loaders (used for round-trip checks and fixtures).
void write_prices(const std::filesystem::path& p, std::span<const PriceBar> bars,
                  TableFormat fmt);
void write_messages(const std::filesystem::path& p,
                    std::span<const RawMessage> msgs, TableFormat fmt);

/// Labels for one company's contiguous price series (needs >= 2 bars).
/// Produces one label per bar except the first.
std::vector<MovementLabel> derive_labels(std::span<const PriceBar> prices);

}  // namespace stocksent
