#include "pcoh/wire.hpp"

#include <bit>
#include <cstring>

#include "pcoh/errors.hpp"

namespace pcoh {

    void ByteWriter::u32(std::uint32_t x)
    {
        for(int i = 0; i < 4; ++i)
            out_.push_back(std::byte(x >> (8 * i)));
    }

    void ByteWriter::u64(std::uint64_t x)
    {
        for(int i = 0; i < 8; ++i)
            out_.push_back(std::byte(x >> (8 * i)));
    }

    void ByteWriter::f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }

    void ByteWriter::string(const std::string& s)
    {
        u64(s.size());
        for(char c: s)
            out_.push_back(std::byte(c));
    }

    void ByteReader::need(std::size_t n) const
    {
        if (remaining() < n)
            throw ProtocolError("truncated frame: need " + std::to_string(n) + " bytes, have " + std::to_string(remaining()));
    }

    std::uint8_t ByteReader::u8()
    {
        need(1);
        return std::uint8_t(in_[pos_++]);
    }

    std::uint32_t ByteReader::u32()
    {
        need(4);
        std::uint32_t x = 0;
        for(int i = 0; i < 4; ++i)
            x |= std::uint32_t(in_[pos_++]) << (8 * i);
        return x;
    }

    std::uint64_t ByteReader::u64()
    {
        need(8);
        std::uint64_t x = 0;
        for(int i = 0; i < 8; ++i)
            x |= std::uint64_t(in_[pos_++]) << (8 * i);
        return x;
    }

    double ByteReader::f64() { return std::bit_cast<double>(u64()); }

    std::string ByteReader::string()
    {
        std::uint64_t n = u64();
        need(n);
        std::string s(n, '\0');
        std::memcpy(s.data(), in_.data() + pos_, n);
        pos_ += n;
        return s;
    }

    void encode_frame(const Message& msg, Bytes& out)
    {
        ByteWriter w(out);
        w.u8(std::uint8_t(msg.kind));
        w.u32(msg.source);
        w.u32(msg.destination);
        w.u64(msg.owner.uid);
        w.f64(msg.owner.value);
        w.u64(msg.entries.size());
        for(const CellKey& e: msg.entries) {
            w.f64(e.value);
            w.u64(e.uid);
        }
    }

    std::vector<Message> decode_frames(std::span<const std::byte> in)
    {
        std::vector<Message> result;
        ByteReader r(in);
        while(not r.done()) {
            Message msg;
            std::uint8_t kind = r.u8();
            if (kind > std::uint8_t(MessageKind::ClearRequest))
                throw ProtocolError("unknown message kind " + std::to_string(kind));
            msg.kind = MessageKind(kind);
            msg.source = r.u32();
            msg.destination = r.u32();
            msg.owner.uid = r.u64();
            msg.owner.value = r.f64();
            std::uint64_t n = r.u64();
            if (n > r.remaining() / 16)
                throw ProtocolError("entry count " + std::to_string(n) + " exceeds frame size");
            msg.entries.resize(n);
            for(auto& e: msg.entries) {
                e.value = r.f64();
                e.uid = r.u64();
            }

            if (msg.kind == MessageKind::ColumnPayload and msg.entries.empty())
                throw ProtocolError("column payload without entries");
            if (msg.kind == MessageKind::ClearRequest and not msg.entries.empty())
                throw ProtocolError("clear request carrying entries");
            if (not is_strictly_sorted(msg.entries))
                throw ProtocolError("column payload entries not sorted");

            result.push_back(std::move(msg));
        }
        return result;
    }

} // namespace pcoh
