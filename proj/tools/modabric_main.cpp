#include <iostream>

int main() {
  std::cout << "modabric CLI placeholder\n";
  return 0;
}
