#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define MAX_ITEMS 64
#define NAME_LEN 32

/* Inventory record kept in a fixed-size table. */
struct item {
    char name[NAME_LEN];
    int quantity;
    double price;
};

static struct item table[MAX_ITEMS];
static int item_count = 0;

int find_item(const char *name)
{
    int i;
    for (i = 0; i < item_count; i++) {
        if (strcmp(table[i].name, name) == 0) {
            return i;
        }
    }
    return -1;
}

int add_item(const char *name, int quantity, double price)
{
    int index = find_item(name);
    if (index >= 0) {
        table[index].quantity += quantity;
        table[index].price = price;
        return index;
    }
    if (item_count >= MAX_ITEMS) {
        fprintf(stderr, "table full\n");
        return -1;
    }
    strncpy(table[item_count].name, name, NAME_LEN - 1);
    table[item_count].name[NAME_LEN - 1] = '\0';
    table[item_count].quantity = quantity;
    table[item_count].price = price;
    item_count++;
    return item_count - 1;
}

int remove_item(const char *name, int quantity)
{
    int index = find_item(name);
    if (index < 0) {
        return 0;
    }
    if (table[index].quantity < quantity) {
        quantity = table[index].quantity;
    }
    table[index].quantity -= quantity;
    return quantity;
}

double total_value(void)
{
    double sum = 0.0;
    int i;
    for (i = 0; i < item_count; i++) {
        sum += table[i].quantity * table[i].price;
    }
    return sum;
}

void sort_by_value(void)
{
    int i, j;
    for (i = 1; i < item_count; i++) {
        struct item key = table[i];
        double key_value = key.quantity * key.price;
        j = i - 1;
        while (j >= 0 && table[j].quantity * table[j].price < key_value) {
            table[j + 1] = table[j];
            j--;
        }
        table[j + 1] = key;
    }
}

int parse_line(char *line, char *name, int *quantity, double *price)
{
    char *token = strtok(line, ",");
    if (token == NULL) {
        return 0;
    }
    strncpy(name, token, NAME_LEN - 1);
    name[NAME_LEN - 1] = '\0';
    token = strtok(NULL, ",");
    if (token == NULL) {
        return 0;
    }
    *quantity = atoi(token);
    token = strtok(NULL, ",");
    if (token == NULL) {
        return 0;
    }
    *price = atof(token);
    return 1;
}

int load_file(const char *path)
{
    FILE *in = fopen(path, "r");
    char line[128];
    char name[NAME_LEN];
    int quantity;
    double price;
    int loaded = 0;
    if (in == NULL) {
        perror(path);
        return -1;
    }
    while (fgets(line, sizeof line, in) != NULL) {
        line[strcspn(line, "\r\n")] = '\0';
        if (line[0] == '#' || line[0] == '\0') {
            continue;
        }
        if (parse_line(line, name, &quantity, &price)) {
            add_item(name, quantity, price);
            loaded++;
        } else {
            fprintf(stderr, "bad line: %s\n", line);
        }
    }
    fclose(in);
    return loaded;
}

void print_report(FILE *out)
{
    int i;
    fprintf(out, "%-20s %8s %10s\n", "item", "qty", "value");
    for (i = 0; i < item_count; i++) {
        double value = table[i].quantity * table[i].price;
        fprintf(out, "%-20s %8d %10.2f\n", table[i].name, table[i].quantity, value);
    }
    fprintf(out, "total %.2f\n", total_value());
}

int count_below(int limit)
{
    int count = 0;
    int i;
    for (i = 0; i < item_count; i++) {
        if (table[i].quantity < limit) {
            count++;
        }
    }
    return count;
}

double average_price(void)
{
    double sum = 0.0;
    int i;
    if (item_count == 0) {
        return 0.0;
    }
    for (i = 0; i < item_count; i++) {
        sum += table[i].price;
    }
    return sum / item_count;
}

int main(int argc, char **argv)
{
    int loaded;
    int low;
    if (argc < 2) {
        fprintf(stderr, "usage: %s file [limit]\n", argv[0]);
        return 1;
    }
    loaded = load_file(argv[1]);
    if (loaded < 0) {
        return 1;
    }
    low = argc > 2 ? atoi(argv[2]) : 5;
    sort_by_value();
    print_report(stdout);
    printf("%d items loaded\n", loaded);
    printf("%d items below %d\n", count_below(low), low);
    printf("average price %.2f\n", average_price());
    if (remove_item("widget", 3) > 0) {
        printf("removed widgets, %.2f left\n", total_value());
    }
    return 0;
}
