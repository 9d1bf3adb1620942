// Price-time priority limit order book for a single instrument.
// Prices are integer ticks, sizes integer shares. Both sides are kept
// best-first so begin() is always the top of book.
#pragma once

#include <cstdint>
#include <functional>
#include <iterator>
#include <list>
#include <map>
#include <unordered_map>
#include <vector>

namespace lob {

struct Entry {
    int64_t oid;
    int64_t rem;
};

struct Level {
    int64_t total = 0;
    std::list<Entry> q;
};

struct Exec {
    int64_t maker;
    int64_t price;
    int64_t size;
};

enum Status { ST_CANCELED = -1, ST_RESTING = 0, ST_FILLED = 1, ST_PARTIAL = 2 };
enum Err { E_OK = 0, E_DUPLICATE = 1, E_UNKNOWN = 2, E_BAD_ORDER = 3 };

class Book {
  public:
    using Bids = std::map<int64_t, Level, std::greater<int64_t>>;
    using Asks = std::map<int64_t, Level, std::less<int64_t>>;

    std::vector<Exec> execs;

    Book() = default;
    Book(const Book& other) { copy_from(other); }
    Book& operator=(const Book& other) {
        if (this != &other) {
            clear();
            copy_from(other);
        }
        return *this;
    }

    void clear() {
        bids_.clear();
        asks_.clear();
        index_.clear();
        execs.clear();
    }

    // side: +1 buy, -1 sell. On success *status and *executed are set and
    // the executions of this order are left in `execs`.
    int submit(int64_t oid, int side, int64_t price, int64_t size, int* status,
               int64_t* executed) {
        execs.clear();
        if (size <= 0 || price < 1 || (side != 1 && side != -1)) return E_BAD_ORDER;
        if (index_.count(oid)) return E_DUPLICATE;
        int64_t done = side == 1 ? sweep(asks_, price, size, true)
                                 : sweep(bids_, price, size, false);
        int64_t left = size - done;
        if (left > 0) {
            if (side == 1)
                rest(bids_, oid, 1, price, left);
            else
                rest(asks_, oid, -1, price, left);
        }
        *executed = done;
        if (done == 0)
            *status = ST_RESTING;
        else if (left == 0)
            *status = ST_FILLED;
        else
            *status = ST_PARTIAL;
        return E_OK;
    }

    int cancel(int64_t oid, int64_t* canceled) {
        execs.clear();
        auto found = index_.find(oid);
        if (found == index_.end()) return E_UNKNOWN;
        Loc loc = found->second;
        index_.erase(found);
        if (loc.side == 1)
            unlink(bids_, loc, canceled);
        else
            unlink(asks_, loc, canceled);
        return E_OK;
    }

    int64_t best_bid() const { return bids_.empty() ? 0 : bids_.begin()->first; }
    int64_t best_ask() const { return asks_.empty() ? 0 : asks_.begin()->first; }
    int64_t n_orders() const { return static_cast<int64_t>(index_.size()); }
    int64_t n_levels(int side) const {
        return static_cast<int64_t>(side == 1 ? bids_.size() : asks_.size());
    }

    int64_t remaining(int64_t oid) const {
        auto found = index_.find(oid);
        return found == index_.end() ? -1 : found->second.it->rem;
    }

    // Top `n` levels (n < 0: all), best first.
    void levels(int side, int64_t n, std::vector<int64_t>& prices,
                std::vector<int64_t>& totals) const {
        if (side == 1)
            collect(bids_, n, prices, totals);
        else
            collect(asks_, n, prices, totals);
    }

    void queue(int side, int64_t price, std::vector<int64_t>& oids,
               std::vector<int64_t>& rems) const {
        const Level* lvl = nullptr;
        if (side == 1) {
            auto f = bids_.find(price);
            if (f != bids_.end()) lvl = &f->second;
        } else {
            auto f = asks_.find(price);
            if (f != asks_.end()) lvl = &f->second;
        }
        if (!lvl) return;
        for (const Entry& e : lvl->q) {
            oids.push_back(e.oid);
            rems.push_back(e.rem);
        }
    }

    int64_t resting_volume() const { return side_volume(bids_) + side_volume(asks_); }

    // Full structural audit. Returns 0 when consistent, otherwise a code:
    // 1 crossed, 2 empty level, 3 level total mismatch, 4 index mismatch.
    int audit() const {
        if (!bids_.empty() && !asks_.empty() && bids_.begin()->first >= asks_.begin()->first)
            return 1;
        size_t seen = 0;
        int code = audit_side(bids_, 1, &seen);
        if (code) return code;
        code = audit_side(asks_, -1, &seen);
        if (code) return code;
        return seen == index_.size() ? 0 : 4;
    }

  private:
    struct Loc {
        int side;
        int64_t price;
        std::list<Entry>::iterator it;
    };

    Bids bids_;
    Asks asks_;
    std::unordered_map<int64_t, Loc> index_;

    template <class Side>
    int64_t sweep(Side& opp, int64_t limit, int64_t size, bool is_buy) {
        int64_t left = size;
        while (left > 0 && !opp.empty()) {
            auto top = opp.begin();
            int64_t px = top->first;
            if (is_buy ? px > limit : px < limit) break;
            Level& lvl = top->second;
            while (left > 0 && !lvl.q.empty()) {
                Entry& e = lvl.q.front();
                int64_t fill = e.rem < left ? e.rem : left;
                execs.push_back(Exec{e.oid, px, fill});
                e.rem -= fill;
                lvl.total -= fill;
                left -= fill;
                if (e.rem == 0) {
                    index_.erase(e.oid);
                    lvl.q.pop_front();
                }
            }
            if (lvl.q.empty()) opp.erase(top);
        }
        return size - left;
    }

    template <class Side>
    void rest(Side& own, int64_t oid, int side, int64_t price, int64_t size) {
        Level& lvl = own[price];
        lvl.q.push_back(Entry{oid, size});
        lvl.total += size;
        index_[oid] = Loc{side, price, std::prev(lvl.q.end())};
    }

    template <class Side>
    void unlink(Side& own, const Loc& loc, int64_t* canceled) {
        auto lvl = own.find(loc.price);
        *canceled = loc.it->rem;
        lvl->second.total -= loc.it->rem;
        lvl->second.q.erase(loc.it);
        if (lvl->second.q.empty()) own.erase(lvl);
    }

    template <class Side>
    static void collect(const Side& s, int64_t n, std::vector<int64_t>& prices,
                        std::vector<int64_t>& totals) {
        int64_t k = 0;
        for (auto it = s.begin(); it != s.end() && (n < 0 || k < n); ++it, ++k) {
            prices.push_back(it->first);
            totals.push_back(it->second.total);
        }
    }

    template <class Side>
    static int64_t side_volume(const Side& s) {
        int64_t v = 0;
        for (const auto& kv : s) v += kv.second.total;
        return v;
    }

    template <class Side>
    int audit_side(const Side& s, int side, size_t* seen) const {
        for (const auto& kv : s) {
            if (kv.second.q.empty()) return 2;
            int64_t sum = 0;
            for (const Entry& e : kv.second.q) {
                if (e.rem <= 0) return 3;
                sum += e.rem;
                auto f = index_.find(e.oid);
                if (f == index_.end() || f->second.side != side || f->second.price != kv.first)
                    return 4;
                ++*seen;
            }
            if (sum != kv.second.total) return 3;
        }
        return 0;
    }

    template <class Side>
    void copy_side(const Side& src, Side& dst, int side) {
        for (const auto& kv : src) {
            Level& lvl = dst[kv.first];
            for (const Entry& e : kv.second.q) {
                lvl.q.push_back(e);
                index_[e.oid] = Loc{side, kv.first, std::prev(lvl.q.end())};
            }
            lvl.total = kv.second.total;
        }
    }

    void copy_from(const Book& other) {
        copy_side(other.bids_, bids_, 1);
        copy_side(other.asks_, asks_, -1);
    }
};

}  // namespace lob
