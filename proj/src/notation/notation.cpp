#include "capsicaps/notation/notation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "capsicaps/rules/errors.hpp"

namespace capsicaps::notation {

using namespace rules;

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0   ? fmt::format("line {}, column {}: {}", line, column, what)
                         : column > 0 ? fmt::format("column {}: {}", column, what)
                                      : what),
      line_(line),
      column_(column) {}

namespace {

// Cursor over one line of move text; all errors carry a 1-based column.
class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= s_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(fmt::format("expected '{}'", c));
    }
    void expect(std::string_view word) {
        skip_ws();
        if (s_.substr(pos_, word.size()) != word) fail(fmt::format("expected '{}'", word));
        pos_ += word.size();
    }
    int digit() {
        const char c = peek();
        if (!std::isdigit(static_cast<unsigned char>(c))) fail("expected a digit");
        ++pos_;
        return c - '0';
    }
    int number() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a number");
        int v = 0;
        std::from_chars(s_.data() + start, s_.data() + pos_, v);
        return v;
    }
    CellCoord cell() {
        expect('P');
        const int x = digit();
        // Coordinates are written without separators, so no whitespace inside.
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected a digit");
        const int y = s_[pos_++] - '0';
        return {x, y};
    }
    int rotation_state() {
        const std::size_t at = (skip_ws(), pos_);
        const int b = number();
        if (b > 3) fail_at(at, fmt::format("b={} outside 0..3", b));
        return b;
    }
    Spin spin() {
        skip_ws();
        const std::size_t at = pos_;
        int sign = 0;
        if (accept('+')) sign = 1;
        else if (accept('-')) sign = -1;
        else fail("expected spin +90 or -90");
        const int amount = number();
        if (amount != 90) fail_at(at, fmt::format("spin must be +90 or -90, got {}{}", sign > 0 ? '+' : '-', amount));
        return sign > 0 ? Spin::Plus : Spin::Minus;
    }
    std::size_t pos() const { return pos_; }
    void rewind(std::size_t p) { pos_ = p; }

    [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
    [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
        throw ParseError(what, 0, static_cast<int>(at) + 1);
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string spin_text(Spin s) { return s == Spin::Plus ? "+90" : "-90"; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Leading "J<n>:" (whitespace tolerant); returns the index or nullopt.
std::optional<int> index_prefix(Cursor& c) {
    const std::size_t start = c.pos();
    if (!c.accept('J')) return std::nullopt;
    if (!std::isdigit(static_cast<unsigned char>(c.peek()))) {
        c.rewind(start);
        return std::nullopt;
    }
    const int n = c.number();
    c.expect(':');
    return n;
}

}  // namespace

MoveText parse_move_text(std::string_view line) {
    Cursor c(line);
    MoveText out{std::string(trim(line)), index_prefix(c), Move{}};

    c.expect('G');
    if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
        const std::size_t at = c.pos();
        const int k = c.digit();
        if (k < 1 || k > 4) c.fail_at(at, fmt::format("gear kind G{} does not exist", k));
        c.expect('@');
        const CellCoord cell = c.cell();
        c.expect('(');
        c.expect('b');
        c.expect('=');
        const int b = c.rotation_state();
        c.expect(')');
        const Spin s = c.spin();
        out.move = Placement{static_cast<GearKind>(k - 1), cell, b, s};
    } else {
        c.expect('@');
        const CellCoord first = c.cell();
        if (c.accept(':')) {
            c.expect('b');
            c.expect('=');
            const int b = c.rotation_state();
            c.expect(';');
            c.expect('G');
            c.expect('@');
            const CellCoord rot = c.cell();
            const Spin s = c.spin();
            out.move = PreMoveRotation{first, b, rot, s};
        } else {
            out.move = Rotation{first, c.spin()};
        }
    }
    if (!c.done()) c.fail("unexpected trailing text");
    return out;
}

Move parse_move(std::string_view line) { return parse_move_text(line).move; }

std::string format_move(const Move& move) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Placement>) {
                return fmt::format("G{}@{}(b={}){}", kind_number(m.kind), to_string(m.cell), m.initial_b, spin_text(m.spin));
            } else if constexpr (std::is_same_v<T, Rotation>) {
                return fmt::format("G@{}{}", to_string(m.cell), spin_text(m.spin));
            } else {
                return fmt::format("G@{}:b={} ; G@{}{}", to_string(m.premove_cell), m.premove_b,
                                   to_string(m.rotation_cell), spin_text(m.spin));
            }
        },
        move);
}

std::string format_move_line(int index, const Move& move) { return fmt::format("J{}: {}", index, format_move(move)); }

CellCoord parse_cell(std::string_view text) {
    Cursor c(text);
    const CellCoord cell = c.cell();
    if (!c.done()) c.fail("unexpected trailing text");
    return cell;
}

std::set<CellCoord> parse_obstacle_map(std::string_view bits, int width, int height) {
    if (width < 1 || height < 1) throw ParseError(fmt::format("invalid board {}x{}", width, height), 0, 0);
    if (bits.size() != static_cast<std::size_t>(width * height)) {
        throw ParseError(fmt::format("obstacle map has {} characters, expected {}", bits.size(), width * height), 0, 0);
    }
    std::set<CellCoord> out;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const char ch = bits[i];
        if (ch != '0' && ch != '1') {
            throw ParseError(fmt::format("invalid obstacle map character '{}'", ch), 0, static_cast<int>(i) + 1);
        }
        // Row segments run bottom to top, each left to right.
        if (ch == '0') out.insert({static_cast<int>(i) % width + 1, static_cast<int>(i) / width + 1});
    }
    return out;
}

std::string format_obstacle_map(const std::set<CellCoord>& obstacles, int width, int height) {
    std::string out;
    for (int y = 1; y <= height; ++y) {
        for (int x = 1; x <= width; ++x) out.push_back(obstacles.contains({x, y}) ? '0' : '1');
    }
    return out;
}

Inventory parse_inventory(std::string_view code) {
    if (code.size() != 8) throw ParseError(fmt::format("inventory code must be 8 digits, got {}", code.size()), 0, 0);
    Inventory inv{};
    for (std::size_t i = 0; i < 8; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(code[i]))) {
            throw ParseError("inventory code must be decimal digits", 0, static_cast<int>(i) + 1);
        }
    }
    for (std::size_t k = 0; k < 4; ++k) inv[k] = (code[2 * k] - '0') * 10 + (code[2 * k + 1] - '0');
    return inv;
}

std::string format_inventory(const Inventory& inv) {
    std::string out;
    for (int n : inv) {
        if (n < 0 || n > 99) throw FormatError(fmt::format("inventory count {} does not fit two digits", n));
        out += fmt::format("{:02}", n);
    }
    return out;
}

std::vector<TurnEvent> checksum_order(std::span<const TurnEvent> events) {
    auto key = [](const TurnEvent& e) {
        int cls = 2;
        int climb = 0;
        if (std::holds_alternative<ExitEvent>(e)) cls = 0;
        if (const auto* j = std::get_if<JumpEvent>(&e)) {
            cls = 1;
            climb = j->to.y - j->from.y;
        }
        return std::tuple{cls, -climb, event_mouse(e)};
    };
    std::vector<TurnEvent> out(events.begin(), events.end());
    std::ranges::stable_sort(out, {}, key);
    return out;
}

std::string format_checksum(int move_no, std::span<const TurnEvent> events, const Inventory& inventory) {
    std::string inv;
    for (int n : inventory) {
        if (n < 0 || n > 9) throw FormatError(fmt::format("inventory count {} does not fit one checksum digit", n));
        inv.push_back(static_cast<char>('0' + n));
    }
    std::vector<std::string> tokens;
    for (const TurnEvent& e : checksum_order(events)) {
        std::visit(
            [&](const auto& ev) {
                using T = std::decay_t<decltype(ev)>;
                if constexpr (std::is_same_v<T, ExitEvent>) tokens.push_back(fmt::format("M{}_OUT", ev.mouse));
                else if constexpr (std::is_same_v<T, JumpEvent>) tokens.push_back(fmt::format("M{}@{}", ev.mouse, to_string(ev.to)));
                else tokens.push_back(fmt::format("M{}_IN", ev.mouse));
            },
            e);
    }
    const std::string descriptor = tokens.empty() ? "Rotation" : fmt::format("{}", fmt::join(tokens, "_"));
    return fmt::format("J{}_State-{}-INV{}", move_no, descriptor, inv);
}

std::string format_load_checksum(const GameState& state) {
    std::vector<std::string> parts;
    // std::map orders CellCoord by (x, y), which is the listing order.
    for (const auto& [cell, gear] : state.gears) parts.push_back(fmt::format("{}={}", to_string(cell), gear.b));
    return fmt::format("Load_b:{}", fmt::join(parts, ";"));
}

GameLog parse_game_log(std::string_view text) {
    GameLog log;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view t = trim(line);
        if (t.size() < 2 || t[0] != 'J' || !std::isdigit(static_cast<unsigned char>(t[1]))) continue;
        MoveText mt;
        try {
            mt = parse_move_text(line);
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("unparseable move \"{}\": {}", t, e.what()), line_no, e.column());
        }
        const int expected = static_cast<int>(log.moves.size()) + 1;
        if (mt.index != expected) {
            throw ParseError(fmt::format("move index J{} out of sequence, expected J{}", mt.index.value_or(0), expected),
                             line_no, 1);
        }
        log.moves.push_back(std::move(mt));
    }
    return log;
}

std::string format_game_log(const GameLog& log, int level_id) {
    std::string out = fmt::format("--- GAME LOG: LEVEL {} ---\n", level_id);
    for (std::size_t i = 0; i < log.moves.size(); ++i) {
        out += format_move_line(static_cast<int>(i) + 1, log.moves[i].move) + "\n";
    }
    return out;
}

Level parse_level(std::string_view text) {
    std::map<std::string, std::string> fields;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string_view t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no, 1);
        std::string key(trim(t.substr(0, eq)));
        if (!fields.emplace(key, std::string(trim(t.substr(eq + 1)))).second) {
            throw ParseError("duplicate key '" + key + "'", line_no, 1);
        }
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) throw ParseError("level file lacks '" + key + "'", 0, 0);
        return it->second;
    };
    auto integer = [&](const std::string& key) {
        const std::string& v = need(key);
        int n = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError("'" + key + "' is not an integer", 0, 0);
        return n;
    };
    for (const auto& [key, value] : fields) {
        if (key != "id" && key != "width" && key != "height" && key != "obstacle_map" && key != "inventory") {
            throw ParseError("unknown level key '" + key + "'", 0, 0);
        }
    }
    Level level;
    level.id = integer("id");
    level.width = integer("width");
    level.height = integer("height");
    level.obstacles = parse_obstacle_map(need("obstacle_map"), level.width, level.height);
    level.inventory = parse_inventory(need("inventory"));
    level.validate();
    return level;
}

std::string format_level(const Level& level) {
    return fmt::format("id={}\nwidth={}\nheight={}\nobstacle_map={}\ninventory={}\n", level.id, level.width,
                       level.height, format_obstacle_map(level.obstacles, level.width, level.height),
                       format_inventory(level.inventory));
}

}  // namespace capsicaps::notation
