#include <string>
#include <vector>

class Inventory {
public:
    void add(const std::string &item);
    std::size_t count() const;

private:
    std::vector<std::string> items_;
};

void Inventory::add(const std::string &item)
{
    items_.push_back(item);
}

std::size_t Inventory::count() const
{
    return items_.size();
}
