#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hstm/anonymize.hpp"
#include "hstm/core.hpp"
#include "hstm/filter.hpp"

namespace hstm {

// Parse or encoding failure with the position that caused it.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, std::uint64_t offset, bool offset_is_line,
            const std::string& what)
        : std::runtime_error(path + ":" + (offset_is_line ? "line " : "byte ") +
                             std::to_string(offset) + ": " + what),
          offset_(offset),
          offset_is_line_(offset_is_line) {}

    std::uint64_t offset() const { return offset_; }
    bool offset_is_line() const { return offset_is_line_; }

private:
    std::uint64_t offset_;
    bool offset_is_line_;
};

enum class StreamFormat { binary, csv };

// Picks the format from the file extension; ".csv" means CSV, anything
// else is the binary container.
inline StreamFormat detect_format(std::string_view path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return StreamFormat::csv;
    return StreamFormat::binary;
}

// Pull-based record stream with bounded memory.
class RecordSource {
public:
    virtual ~RecordSource() = default;
    virtual std::optional<PacketRecord> next() = 0;
};

// Binary container: magic "HSTM", uint32 LE version = 1, then repeated
// (uint64 LE src, uint64 LE dst).  No padding, no checksum.
inline constexpr std::array<char, 4> kBinaryMagic = {'H', 'S', 'T', 'M'};
inline constexpr std::uint32_t kBinaryVersion = 1;

namespace detail {

inline std::uint64_t load_le64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline void store_le64(std::uint64_t v, unsigned char* p) {
    for (int i = 0; i < 8; ++i) {
        p[i] = static_cast<unsigned char>(v & 0xFF);
        v >>= 8;
    }
}

}  // namespace detail

class BinaryRecordReader final : public RecordSource {
public:
    explicit BinaryRecordReader(std::string path) : path_(std::move(path)), in_(path_, std::ios::binary) {
        if (!in_) throw std::runtime_error("hstm: cannot open input file: " + path_);
        unsigned char header[8];
        in_.read(reinterpret_cast<char*>(header), sizeof(header));
        if (in_.gcount() != sizeof(header)) {
            throw IoError(path_, 0, false, "truncated header");
        }
        if (header[0] != 'H' || header[1] != 'S' || header[2] != 'T' || header[3] != 'M') {
            throw IoError(path_, 0, false, "bad magic, expected HSTM");
        }
        const std::uint32_t version = static_cast<std::uint32_t>(header[4]) |
                                      (static_cast<std::uint32_t>(header[5]) << 8) |
                                      (static_cast<std::uint32_t>(header[6]) << 16) |
                                      (static_cast<std::uint32_t>(header[7]) << 24);
        if (version != kBinaryVersion) {
            throw IoError(path_, 4, false, "unsupported version " + std::to_string(version));
        }
        offset_ = sizeof(header);
    }

    std::optional<PacketRecord> next() override {
        if (fill_ == pos_) {
            if (tail_ != 0) {
                throw IoError(path_, offset_ + tail_, false, "truncated final record");
            }
            in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
            const auto got = static_cast<std::size_t>(in_.gcount());
            tail_ = got % 16;  // a short read means EOF, so a remainder is a cut record
            fill_ = got - tail_;
            pos_ = 0;
            if (fill_ == 0) {
                if (tail_ != 0) {
                    throw IoError(path_, offset_ + tail_, false, "truncated final record");
                }
                return std::nullopt;
            }
        }
        PacketRecord rec{detail::load_le64(buffer_.data() + pos_),
                         detail::load_le64(buffer_.data() + pos_ + 8)};
        pos_ += 16;
        offset_ += 16;
        return rec;
    }

private:
    std::string path_;
    std::ifstream in_;
    std::array<unsigned char, 1 << 16> buffer_{};
    std::size_t fill_ = 0;
    std::size_t pos_ = 0;
    std::size_t tail_ = 0;
    std::uint64_t offset_ = 0;
};

class BinaryRecordWriter {
public:
    explicit BinaryRecordWriter(std::string path) : path_(std::move(path)), out_(path_, std::ios::binary) {
        if (!out_) throw std::runtime_error("hstm: cannot open output file: " + path_);
        out_.write(kBinaryMagic.data(), 4);
        const unsigned char version[4] = {kBinaryVersion & 0xFF, 0, 0, 0};
        out_.write(reinterpret_cast<const char*>(version), 4);
    }

    void write(const PacketRecord& rec) {
        unsigned char raw[16];
        detail::store_le64(rec.src, raw);
        detail::store_le64(rec.dst, raw + 8);
        out_.write(reinterpret_cast<const char*>(raw), sizeof(raw));
        if (pending_ += 16; pending_ >= (1 << 16)) flush_check();
    }

    void close() {
        flush_check();
        out_.close();
        if (!out_) throw std::runtime_error("hstm: failed writing " + path_);
    }

private:
    void flush_check() {
        pending_ = 0;
        if (!out_) throw std::runtime_error("hstm: failed writing " + path_);
    }

    std::string path_;
    std::ofstream out_;
    std::size_t pending_ = 0;
};

class CsvRecordWriter {
public:
    explicit CsvRecordWriter(std::string path, bool header = true)
        : path_(std::move(path)), out_(path_, std::ios::trunc) {
        if (!out_) throw std::runtime_error("hstm: cannot open output file: " + path_);
        if (header) out_ << "src,dst\n";
    }

    void write(const PacketRecord& rec) { out_ << rec.src << ',' << rec.dst << '\n'; }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("hstm: failed writing " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

// CSV: one record per line, unsigned decimal fields "src,dst" with an
// optional third field "count" meaning the pair repeated count times.
// A leading "src,dst[,count]" header line is skipped.
class CsvRecordReader final : public RecordSource {
public:
    explicit CsvRecordReader(std::string path) : path_(std::move(path)), in_(path_) {
        if (!in_) throw std::runtime_error("hstm: cannot open input file: " + path_);
    }

    std::optional<PacketRecord> next() override {
        if (repeat_left_ > 0) {
            --repeat_left_;
            return pending_;
        }
        std::string line;
        while (std::getline(in_, line)) {
            ++line_number_;
            std::string_view sv = line;
            if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
            if (line_number_ == 1 && sv.starts_with("src")) continue;  // header
            if (sv.empty()) {
                throw IoError(path_, line_number_, true, "blank line");
            }
            auto [rec, count] = parse_line(sv);
            if (count == 0) continue;  // pre-aggregated pair with zero multiplicity
            pending_ = rec;
            repeat_left_ = count - 1;
            return rec;
        }
        return std::nullopt;
    }

private:
    std::pair<PacketRecord, std::uint64_t> parse_line(std::string_view sv) {
        std::array<std::uint64_t, 3> fields{0, 0, 1};
        std::size_t nfields = 0;
        const char* p = sv.data();
        const char* end = p + sv.size();
        while (true) {
            if (nfields == 3) throw IoError(path_, line_number_, true, "too many fields");
            auto [next, ec] = std::from_chars(p, end, fields[nfields]);
            if (ec != std::errc{} || (next != end && *next != ',')) {
                throw IoError(path_, line_number_, true, "malformed record");
            }
            ++nfields;
            if (next == end) break;
            p = next + 1;
        }
        if (nfields < 2) throw IoError(path_, line_number_, true, "expected src,dst[,count]");
        return {{fields[0], fields[1]}, fields[2]};
    }

    std::string path_;
    std::ifstream in_;
    std::uint64_t line_number_ = 0;
    PacketRecord pending_{};
    std::uint64_t repeat_left_ = 0;
};

inline std::unique_ptr<RecordSource> open_record_source(const std::string& path,
                                                        std::optional<StreamFormat> format = {}) {
    const StreamFormat f = format ? *format : detect_format(path);
    if (f == StreamFormat::csv) return std::make_unique<CsvRecordReader>(path);
    return std::make_unique<BinaryRecordReader>(path);
}

// Order-preserving validity filtering.
class FilteredSource final : public RecordSource {
public:
    FilteredSource(std::unique_ptr<RecordSource> inner, ValidityFilter filter)
        : inner_(std::move(inner)), filter_(std::move(filter)) {
        filter_.validate();
    }

    std::optional<PacketRecord> next() override {
        while (auto rec = inner_->next()) {
            if (filter_.passes(*rec)) return rec;
        }
        return std::nullopt;
    }

private:
    std::unique_ptr<RecordSource> inner_;
    ValidityFilter filter_;
};

class AnonymizedSource final : public RecordSource {
public:
    AnonymizedSource(std::unique_ptr<RecordSource> inner, FeistelKey key)
        : inner_(std::move(inner)), key_(key) {}

    std::optional<PacketRecord> next() override {
        if (auto rec = inner_->next()) return anonymize(*rec, key_);
        return std::nullopt;
    }

private:
    std::unique_ptr<RecordSource> inner_;
    FeistelKey key_;
};

// Replays an in-memory record list (tests, small pipelines).
class VectorSource final : public RecordSource {
public:
    explicit VectorSource(std::vector<PacketRecord> records) : records_(std::move(records)) {}

    std::optional<PacketRecord> next() override {
        if (pos_ == records_.size()) return std::nullopt;
        return records_[pos_++];
    }

private:
    std::vector<PacketRecord> records_;
    std::size_t pos_ = 0;
};

inline std::vector<PacketRecord> read_all(RecordSource& source) {
    std::vector<PacketRecord> out;
    while (auto rec = source.next()) out.push_back(*rec);
    return out;
}

inline void write_records(const std::string& path, std::span<const PacketRecord> records) {
    BinaryRecordWriter writer(path);
    for (const auto& rec : records) writer.write(rec);
    writer.close();
}

inline void write_records_csv(const std::string& path, std::span<const PacketRecord> records,
                              bool header = true) {
    CsvRecordWriter writer(path, header);
    for (const auto& rec : records) writer.write(rec);
    writer.close();
}

}  // namespace hstm
