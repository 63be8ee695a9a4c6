#pragma once

#include <map>
#include <string>
#include <vector>

namespace wavereg {

// Flat key=value configuration layered over built-in defaults. Unknown keys
// are a hard error; silent typo tolerance is how benchmark runs go wrong.
class Config {
public:
    Config();  // built-in defaults

    void set(const std::string& key, const std::string& value);
    void load_file(const std::string& path);

    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::string get_string(const std::string& key) const;

    bool is_known(const std::string& key) const;
    std::vector<std::string> keys() const;

private:
    const std::string& raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

}  // namespace wavereg
