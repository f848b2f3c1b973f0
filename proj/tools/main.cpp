#include <cstdio>
int main(){ std::puts("cloudfill"); return 0; }
