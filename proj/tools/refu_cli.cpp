#include <cstdio>
int main() { std::puts("refu CLI placeholder"); return 0; }
