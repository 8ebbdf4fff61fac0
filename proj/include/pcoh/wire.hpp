#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcoh/column.hpp"

namespace pcoh {

    using Bytes = std::vector<std::byte>;

    // Little-endian writer/reader for frames and result blobs.
    class ByteWriter {
    public:
        explicit ByteWriter(Bytes& out) : out_(out) {}

        void u8(std::uint8_t x) { out_.push_back(std::byte {x}); }
        void u32(std::uint32_t x);
        void u64(std::uint64_t x);
        void i64(std::int64_t x) { u64(std::uint64_t(x)); }
        void f64(double x);
        void key(const CellKey& k) { f64(k.value); u64(k.uid); }
        void string(const std::string& s);

    private:
        Bytes& out_;
    };

    class ByteReader {
    public:
        explicit ByteReader(std::span<const std::byte> in) : in_(in) {}

        std::uint8_t u8();
        std::uint32_t u32();
        std::uint64_t u64();
        std::int64_t i64() { return std::int64_t(u64()); }
        double f64();
        CellKey key() { double v = f64(); return {v, u64()}; }
        std::string string();

        bool done() const { return pos_ == in_.size(); }
        std::size_t remaining() const { return in_.size() - pos_; }

    private:
        void need(std::size_t n) const;

        std::span<const std::byte> in_;
        std::size_t pos_ {0};
    };

    enum class MessageKind : std::uint8_t {
        ColumnPayload = 0,
        ClearRequest = 1,
    };

    struct Message {
        MessageKind kind {MessageKind::ColumnPayload};
        std::uint32_t source {0};
        std::uint32_t destination {0};
        CellKey owner;
        Entries entries;      // empty for ClearRequest

        static Message column(std::uint32_t source, std::uint32_t destination, CellKey owner, Entries entries)
        {
            return {MessageKind::ColumnPayload, source, destination, owner, std::move(entries)};
        }

        static Message clear(std::uint32_t source, std::uint32_t destination, CellKey owner)
        {
            return {MessageKind::ClearRequest, source, destination, owner, {}};
        }
    };

    // Frame layout, little-endian:
    //   u8 kind, u32 source, u32 destination, u64 owner uid, f64 owner value,
    //   u64 entry count, then (f64 value, u64 uid) per entry.
    void encode_frame(const Message& msg, Bytes& out);

    // Decodes a concatenation of frames; throws ProtocolError on malformed input,
    // an empty column payload, unsorted entries or a clear request with entries.
    std::vector<Message> decode_frames(std::span<const std::byte> in);

} // namespace pcoh
