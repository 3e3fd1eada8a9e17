#include <cstdio>
int main() { std::puts("funnelkit"); return 0; }
